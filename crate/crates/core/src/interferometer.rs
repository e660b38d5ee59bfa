//! M-port passive linear network feeding the zero-one photon counters.
//!
//! Convention: annihilation operators transform as a_i = Σ_j U_ij b_j, so a
//! creation operator a_i† becomes Σ_j U*_ij b_j†. Signal ports are modes 1
//! and 2 (indices 0 and 1); the remaining ports carry vacuum ancillas.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{enumerate_sector, factorial, NumberDistribution};

pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Interferometer {
    u: DMatrix<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let g = u.adjoint() * u - DMatrix::<Complex64>::identity(n, n);
    g.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

impl Interferometer {
    pub fn new(u: DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != u.ncols() || u.nrows() < 2 {
            return Err(Error::Invalid(format!(
                "interferometer matrix must be square with at least 2 modes, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        let dev = unitarity_defect(&u);
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Interferometer { u })
    }

    pub fn modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn ancilla_count(&self) -> usize {
        self.modes() - 2
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: MatrixFile = serde_json::from_str(s)?;
        f.into_interferometer()
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let m = self.modes();
        let f = MatrixFile {
            m,
            u_re: (0..m).map(|i| (0..m).map(|j| self.u[(i, j)].re).collect()).collect(),
            u_im: (0..m).map(|i| (0..m).map(|j| self.u[(i, j)].im).collect()).collect(),
        };
        serde_json::to_string_pretty(&f).expect("plain numbers serialize")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "U_re")]
    u_re: Vec<Vec<f64>>,
    #[serde(rename = "U_im")]
    u_im: Vec<Vec<f64>>,
}

impl MatrixFile {
    fn into_interferometer(self) -> Result<Interferometer> {
        let m = self.m;
        let ok = |rows: &Vec<Vec<f64>>| rows.len() == m && rows.iter().all(|r| r.len() == m);
        if !ok(&self.u_re) || !ok(&self.u_im) {
            return Err(Error::Invalid(format!("U_re and U_im must both be {m}x{m}")));
        }
        let u = DMatrix::from_fn(m, m, |i, j| c(self.u_re[i][j], self.u_im[i][j]));
        Interferometer::new(u)
    }
}

/// 50:50 beam splitter for |φ₋(1,0)⟩.
pub fn detector_n1() -> DMatrix<Complex64> {
    let h = 1.0 / 2f64.sqrt();
    DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(-h, 0.0), c(h, 0.0), c(h, 0.0)])
}

/// Ua·Ub·Uc as displayed for the one-ancilla detector. Unitary, but it does
/// not single out |φ₋(2,0)⟩ on the (1,1,0) click pattern.
pub fn displayed_ud2_product() -> DMatrix<Complex64> {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let s6 = 6f64.sqrt();
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let ua = DMatrix::from_row_slice(
        3,
        3,
        &[c(1.0 / s2, 0.0), z, c(-1.0 / s2, 0.0), z, one, z, c(1.0 / s2, 0.0), z, c(1.0 / s2, 0.0)],
    );
    let ub = DMatrix::from_row_slice(
        3,
        3,
        &[
            one,
            z,
            z,
            z,
            c(2.0 / s6, 0.0),
            c(-1.0 / s3, 0.0),
            z,
            c(1.0 / s6, 1.0 / s6),
            c(1.0 / s3, 1.0 / s3),
        ],
    );
    let uc = DMatrix::from_row_slice(
        3,
        3,
        &[
            one,
            z,
            z,
            z,
            c(3.0 * s3 / (4.0 * s5), s3 / (4.0 * s5)),
            c(-3.0 / 4.0, -1.0 / 4.0),
            z,
            c(s5 / (2.0 * s2), 0.0),
            c(s3 / (2.0 * s2), 0.0),
        ],
    );
    ua * ub * uc
}

/// One-ancilla detector for |φ₋(2,0)⟩ with p = 1/2.
///
/// Rows 1 and 2 have moduli (1/√3, 1/2, √(5/12)); the relative phases
/// e^{±iπ/4} make the (1,1,0) amplitude proportional to (1,1,1). Row 3
/// completes the unitary.
pub fn detector_n2() -> DMatrix<Complex64> {
    let s = Complex64::from_polar(1.0, FRAC_PI_4);
    let t = s.conj();
    let u11 = c(1.0 / 3f64.sqrt(), 0.0);
    let u12 = c(0.5, 0.0);
    let u13 = c((5.0f64 / 12.0).sqrt(), 0.0);
    let u21 = s / 3f64.sqrt();
    let u22 = t * 0.5;
    let u23 = -(u11 * u21.conj() + u12 * u22.conj()).conj() / u13;
    let r1 = [u11, u12, u13];
    let r2 = [u21, u22, u23];
    // conjugated cross product is orthogonal to both rows
    let r3 = [
        (r1[1] * r2[2] - r1[2] * r2[1]).conj(),
        (r1[2] * r2[0] - r1[0] * r2[2]).conj(),
        (r1[0] * r2[1] - r1[1] * r2[0]).conj(),
    ];
    DMatrix::from_row_slice(3, 3, &[r1, r2, r3].concat())
}

pub fn builtin_detector(n_tilde: usize) -> Result<Interferometer> {
    match n_tilde {
        1 => Interferometer::new(detector_n1()),
        2 => Interferometer::new(detector_n2()),
        n => Err(Error::UnsupportedDetector(n)),
    }
}

/// B_k[n] for every n of one sector; `values[i][k]` belongs to `dists[i]`.
#[derive(Debug, Clone)]
pub struct BCoefficients {
    pub sector: usize,
    pub dists: Vec<NumberDistribution>,
    pub values: Vec<Vec<Complex64>>,
    index: HashMap<NumberDistribution, usize>,
}

impl BCoefficients {
    fn new(sector: usize, dists: Vec<NumberDistribution>, values: Vec<Vec<Complex64>>) -> Self {
        let index = dists.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
        BCoefficients {
            sector,
            dists,
            values,
            index,
        }
    }

    pub fn get(&self, n: &NumberDistribution) -> Option<&[Complex64]> {
        self.index.get(n).map(|&i| self.values[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NumberDistribution, &[Complex64])> {
        self.dists.iter().zip(self.values.iter().map(|v| v.as_slice()))
    }

    /// Σ_n B*_{k′}[n] B_k[n]; the identity for a unitary network.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let n = self.sector + 1;
        DMatrix::from_fn(n, n, |kp, k| {
            self.values.iter().map(|v| v[kp].conj() * v[k]).sum()
        })
    }

    pub fn max_abs_diff(&self, other: &BCoefficients) -> f64 {
        let mut m: f64 = 0.0;
        for (d, v) in self.iter() {
            let w = other.get(d).expect("same sector layout");
            for (a, b) in v.iter().zip(w) {
                m = m.max((a - b).norm());
            }
        }
        m
    }
}

fn prefactor(n: &NumberDistribution, sector: usize, k: usize) -> f64 {
    (n.factorial_product() / (factorial(sector - k) * factorial(k))).sqrt()
}

/// Production path: coefficient extraction from
/// (Σ_j U*_{1j} x_j)^{N−k} (Σ_j U*_{2j} x_j)^k.
pub fn compute_b_coefficients(itf: &Interferometer, sector: usize) -> BCoefficients {
    let m = itf.modes();
    let u = itf.matrix();
    let dists = enumerate_sector(m, sector);
    let mut values = vec![vec![c(0.0, 0.0); sector + 1]; dists.len()];
    let pos: HashMap<&NumberDistribution, usize> =
        dists.iter().enumerate().map(|(i, d)| (d, i)).collect();
    for k in 0..=sector {
        let mut poly: HashMap<Vec<usize>, Complex64> = HashMap::new();
        poly.insert(vec![0; m], c(1.0, 0.0));
        for t in 0..sector {
            let row = if t < sector - k { 0 } else { 1 };
            let mut next: HashMap<Vec<usize>, Complex64> = HashMap::with_capacity(poly.len() * m);
            for (mono, coef) in &poly {
                for j in 0..m {
                    let w = u[(row, j)].conj();
                    if w == c(0.0, 0.0) {
                        continue;
                    }
                    let mut e = mono.clone();
                    e[j] += 1;
                    *next.entry(e).or_insert(c(0.0, 0.0)) += coef * w;
                }
            }
            poly = next;
        }
        for (mono, coef) in poly {
            let d = NumberDistribution(mono);
            let i = pos[&d];
            values[i][k] = coef * prefactor(&d, sector, k);
        }
    }
    BCoefficients::new(sector, dists, values)
}

/// Oracle path: explicit sum over index tuples j_(N) of the product
/// U*_{1j₁}···U*_{1j_{N−k}} U*_{2j_{N−k+1}}···U*_{2j_N}.
pub fn b_coefficients_tuple_sum(itf: &Interferometer, sector: usize) -> BCoefficients {
    let m = itf.modes();
    let u = itf.matrix();
    let dists = enumerate_sector(m, sector);
    let pos: HashMap<NumberDistribution, usize> =
        dists.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
    let mut values = vec![vec![c(0.0, 0.0); sector + 1]; dists.len()];
    let count = m.pow(sector as u32);
    let mut js = vec![0usize; sector];
    for k in 0..=sector {
        for code in 0..count {
            let mut x = code;
            for j in js.iter_mut() {
                *j = x % m;
                x /= m;
            }
            let mut w = c(1.0, 0.0);
            let mut occ = vec![0usize; m];
            for (t, &j) in js.iter().enumerate() {
                let row = if t < sector - k { 0 } else { 1 };
                w *= u[(row, j)].conj();
                occ[j] += 1;
            }
            values[pos[&NumberDistribution(occ)]][k] += w;
        }
    }
    for (d, v) in dists.iter().zip(values.iter_mut()) {
        for (k, x) in v.iter_mut().enumerate() {
            *x *= prefactor(d, sector, k);
        }
    }
    BCoefficients::new(sector, dists, values)
}

/// Element of a triangular beam-splitter mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpticalElement {
    /// Acts on modes (p, q) as [[cosθ e^{iα}, −sinθ e^{−iβ}], [sinθ e^{iβ}, cosθ e^{−iα}]].
    Rotation {
        p: usize,
        q: usize,
        theta: f64,
        alpha: f64,
        beta: f64,
    },
    Phase {
        mode: usize,
        phase: f64,
    },
}

impl OpticalElement {
    pub fn matrix(&self, m: usize) -> DMatrix<Complex64> {
        let mut g = DMatrix::<Complex64>::identity(m, m);
        match *self {
            OpticalElement::Rotation {
                p,
                q,
                theta,
                alpha,
                beta,
            } => {
                let (s, co) = theta.sin_cos();
                g[(p, p)] = Complex64::from_polar(co, alpha);
                g[(p, q)] = -Complex64::from_polar(s, -beta);
                g[(q, p)] = Complex64::from_polar(s, beta);
                g[(q, q)] = Complex64::from_polar(co, -alpha);
            }
            OpticalElement::Phase { mode, phase } => {
                g[(mode, mode)] = Complex64::from_polar(1.0, phase);
            }
        }
        g
    }
}

/// Factorization U = G₁G₂···G_K·diag(e^{iφ}) by Givens nulling of the
/// subdiagonal, column by column from the bottom row up.
pub fn decompose_reck(itf: &Interferometer) -> Vec<OpticalElement> {
    let m = itf.modes();
    let mut w = itf.matrix().clone();
    let mut ops = Vec::new();
    for j in 0..m {
        for i in (j + 1..m).rev() {
            let (p, q) = (i - 1, i);
            let a = w[(p, j)];
            let b = w[(q, j)];
            if b.norm() < 1e-14 {
                continue;
            }
            let theta = b.norm().atan2(a.norm());
            let alpha = if a.norm() < 1e-300 { 0.0 } else { a.arg() };
            let beta = b.arg();
            let op = OpticalElement::Rotation {
                p,
                q,
                theta,
                alpha,
                beta,
            };
            w = op.matrix(m).adjoint() * w;
            w[(q, j)] = c(0.0, 0.0);
            ops.push(op);
        }
    }
    for k in 0..m {
        let phase = w[(k, k)].arg();
        if phase.abs() > 1e-15 {
            ops.push(OpticalElement::Phase { mode: k, phase });
        }
    }
    ops
}

pub fn reconstruct(m: usize, ops: &[OpticalElement]) -> DMatrix<Complex64> {
    ops.iter()
        .fold(DMatrix::identity(m, m), |acc, op| acc * op.matrix(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_unitary() {
        assert!(unitarity_defect(&detector_n1()) < 1e-12);
        assert!(unitarity_defect(&detector_n2()) < 1e-12);
        assert!(unitarity_defect(&displayed_ud2_product()) < 1e-12);
        assert!(matches!(builtin_detector(3), Err(Error::UnsupportedDetector(3))));
    }

    #[test]
    fn n1_single_photon() {
        let itf = builtin_detector(1).unwrap();
        let b = compute_b_coefficients(&itf, 1);
        let h = 1.0 / 2f64.sqrt();
        let b10 = b.get(&NumberDistribution(vec![1, 0])).unwrap();
        let b01 = b.get(&NumberDistribution(vec![0, 1])).unwrap();
        assert!((b10[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((b01[0] - c(-h, 0.0)).norm() < 1e-15);
        let g = (b10[0] + b10[1]) * h;
        assert!((g.norm_sqr() - 1.0).abs() < 1e-14);
        // the antisymmetric Bell state never yields the (1,0) click
        assert!(((b10[0] - b10[1]) * h).norm() < 1e-15);
    }

    #[test]
    fn vacuum_sector() {
        let itf = builtin_detector(2).unwrap();
        let b = compute_b_coefficients(&itf, 0);
        assert_eq!(b.values, vec![vec![c(1.0, 0.0)]]);
    }

    #[test]
    fn paths_agree_small() {
        let itf = builtin_detector(2).unwrap();
        for n in 0..=4 {
            let a = compute_b_coefficients(&itf, n);
            let b = b_coefficients_tuple_sum(&itf, n);
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn reck_examples() {
        let id = Interferometer::new(DMatrix::identity(3, 3)).unwrap();
        assert!(decompose_reck(&id).is_empty());
        let bs = builtin_detector(1).unwrap();
        let ops = decompose_reck(&bs);
        assert_eq!(ops.len(), 1);
        match ops[0] {
            OpticalElement::Rotation { theta, .. } => assert!((theta - FRAC_PI_4).abs() < 1e-14),
            _ => panic!("expected a rotation"),
        }
        let u = Interferometer::new(displayed_ud2_product()).unwrap();
        let r = reconstruct(3, &decompose_reck(&u));
        assert!((r - u.matrix()).iter().all(|x| x.norm() < 1e-10));
    }

    #[test]
    fn json_roundtrip() {
        let itf = builtin_detector(2).unwrap();
        let back = Interferometer::from_json_str(&itf.to_json()).unwrap();
        assert!((back.matrix() - itf.matrix()).iter().all(|x| x.norm() < 1e-15));
        let bad = r#"{"M":2,"U_re":[[1,1],[0,1]],"U_im":[[0,0],[0,0]]}"#;
        assert!(matches!(Interferometer::from_json_str(bad), Err(Error::NotUnitary(_))));
    }
}
