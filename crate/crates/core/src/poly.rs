//! Truncated bivariate series in the detector imperfections δη = 1 − η and ν.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest kept powers of δη and ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpansionOrder {
    pub max_deta: usize,
    pub max_nu: usize,
}

impl ExpansionOrder {
    pub const fn new(max_deta: usize, max_nu: usize) -> Self {
        ExpansionOrder { max_deta, max_nu }
    }

    fn len(&self) -> usize {
        (self.max_deta + 1) * (self.max_nu + 1)
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        a <= self.max_deta && b <= self.max_nu
    }

    /// All kept exponent pairs, δη power major.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize)> {
        let nb = self.max_nu;
        (0..=self.max_deta).flat_map(move |a| (0..=nb).map(move |b| (a, b)))
    }
}

impl Default for ExpansionOrder {
    fn default() -> Self {
        ExpansionOrder::new(4, 1)
    }
}

impl fmt::Display for ExpansionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.max_deta, self.max_nu)
    }
}

/// Dense grid `c[a][b]` of the coefficient of δη^a ν^b.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePoly {
    order: ExpansionOrder,
    coeffs: Vec<Complex64>,
}

impl BivariatePoly {
    pub fn zero(order: ExpansionOrder) -> Self {
        BivariatePoly {
            order,
            coeffs: vec![Complex64::new(0.0, 0.0); order.len()],
        }
    }

    pub fn constant(order: ExpansionOrder, c: Complex64) -> Self {
        let mut p = Self::zero(order);
        p.coeffs[0] = c;
        p
    }

    pub fn one(order: ExpansionOrder) -> Self {
        Self::constant(order, Complex64::new(1.0, 0.0))
    }

    /// `c·δη^a ν^b`; zero when the monomial lies beyond the order.
    pub fn monomial(order: ExpansionOrder, a: usize, b: usize, c: Complex64) -> Self {
        let mut p = Self::zero(order);
        if order.contains(a, b) {
            let i = p.idx(a, b);
            p.coeffs[i] = c;
        }
        p
    }

    /// Builds from real coefficients given as rows `[a][b]`; missing entries are zero.
    pub fn from_real_rows(order: ExpansionOrder, rows: &[&[f64]]) -> Self {
        let mut p = Self::zero(order);
        for (a, row) in rows.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                if order.contains(a, b) {
                    let i = p.idx(a, b);
                    p.coeffs[i] = Complex64::new(v, 0.0);
                }
            }
        }
        p
    }

    pub fn order(&self) -> ExpansionOrder {
        self.order
    }

    #[inline]
    fn idx(&self, a: usize, b: usize) -> usize {
        a * (self.order.max_nu + 1) + b
    }

    /// Coefficient of δη^a ν^b (zero outside the order).
    pub fn coeff(&self, a: usize, b: usize) -> Complex64 {
        if self.order.contains(a, b) {
            self.coeffs[self.idx(a, b)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set_coeff(&mut self, a: usize, b: usize, c: Complex64) {
        if self.order.contains(a, b) {
            let i = self.idx(a, b);
            self.coeffs[i] = c;
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        BivariatePoly {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// In-place `self += s·other`.
    pub fn add_scaled(&mut self, other: &BivariatePoly, s: Complex64) -> Result<()> {
        self.check(other)?;
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * s;
        }
        Ok(())
    }

    fn check(&self, other: &BivariatePoly) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    /// Truncated product.
    pub fn mul(&self, other: &BivariatePoly) -> Result<BivariatePoly> {
        self.check(other)?;
        let o = self.order;
        let mut r = Self::zero(o);
        for (a, b) in o.terms() {
            let x = self.coeffs[self.idx(a, b)];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for a2 in 0..=(o.max_deta - a) {
                for b2 in 0..=(o.max_nu - b) {
                    let i = r.idx(a + a2, b + b2);
                    r.coeffs[i] += x * other.coeffs[other.idx(a2, b2)];
                }
            }
        }
        Ok(r)
    }

    /// Series quotient `q` with `q·den == self` up to the order.
    pub fn div(&self, den: &BivariatePoly) -> Result<BivariatePoly> {
        self.check(den)?;
        let d00 = den.coeffs[0];
        if d00.norm() <= 1e-12 {
            return Err(Error::DivisionSingular(d00.norm()));
        }
        let o = self.order;
        let mut q = Self::zero(o);
        for (a, b) in o.terms() {
            let mut s = self.coeffs[self.idx(a, b)];
            for a2 in 0..=a {
                for b2 in 0..=b {
                    if a2 == a && b2 == b {
                        continue;
                    }
                    s -= q.coeffs[q.idx(a2, b2)] * den.coeffs[den.idx(a - a2, b - b2)];
                }
            }
            let i = q.idx(a, b);
            q.coeffs[i] = s / d00;
        }
        Ok(q)
    }

    /// Horner evaluation in both variables.
    pub fn eval(&self, deta: f64, nu: f64) -> Complex64 {
        let o = self.order;
        let mut acc = Complex64::new(0.0, 0.0);
        for a in (0..=o.max_deta).rev() {
            let mut row = Complex64::new(0.0, 0.0);
            for b in (0..=o.max_nu).rev() {
                row = row * nu + self.coeffs[self.idx(a, b)];
            }
            acc = acc * deta + row;
        }
        acc
    }

    /// Same coefficients embedded in (or truncated to) another order.
    pub fn reorder(&self, order: ExpansionOrder) -> BivariatePoly {
        let mut p = Self::zero(order);
        for (a, b) in order.terms() {
            p.set_coeff(a, b, self.coeff(a, b));
        }
        p
    }

    pub fn max_abs_diff(&self, other: &BivariatePoly) -> f64 {
        let o = ExpansionOrder::new(
            self.order.max_deta.max(other.order.max_deta),
            self.order.max_nu.max(other.order.max_nu),
        );
        o.terms()
            .map(|(a, b)| (self.coeff(a, b) - other.coeff(a, b)).norm())
            .fold(0.0, f64::max)
    }

    pub fn conj(&self) -> BivariatePoly {
        BivariatePoly {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }
}

impl Add for &BivariatePoly {
    type Output = BivariatePoly;
    fn add(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut r = self.clone();
        r.add_scaled(rhs, Complex64::new(1.0, 0.0))
            .expect("adding polynomials of different order");
        r
    }
}

impl Sub for &BivariatePoly {
    type Output = BivariatePoly;
    fn sub(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut r = self.clone();
        r.add_scaled(rhs, Complex64::new(-1.0, 0.0))
            .expect("subtracting polynomials of different order");
        r
    }
}

impl Neg for &BivariatePoly {
    type Output = BivariatePoly;
    fn neg(self) -> BivariatePoly {
        self.scale_real(-1.0)
    }
}

pub fn poly_mul(a: &BivariatePoly, b: &BivariatePoly) -> Result<BivariatePoly> {
    a.mul(b)
}

pub fn poly_div(num: &BivariatePoly, den: &BivariatePoly) -> Result<BivariatePoly> {
    num.div(den)
}

pub fn poly_eval(p: &BivariatePoly, deta: f64, nu: f64) -> Complex64 {
    p.eval(deta, nu)
}
