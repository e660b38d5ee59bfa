//! Zero-one photon counters, the Bell-detector POM and its confidence.
//!
//! Probabilities are carried as polynomials in (δη, ν); the Poisson factor
//! e^{−ν} of every counter is left out and cancels in every ratio.

use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{bell_amplitudes, binomial, factorial, omega, NumberDistribution};
use crate::interferometer::{builtin_detector, compute_b_coefficients, BCoefficients, Interferometer};
use crate::poly::{BivariatePoly, ExpansionOrder};

pub const SELECTIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorNoise {
    pub eta: f64,
    pub nu: f64,
}

impl DetectorNoise {
    pub fn new(eta: f64, nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) || !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::Invalid(format!("need 0 ≤ η ≤ 1 and ν ≥ 0, got η={eta}, ν={nu}")));
        }
        Ok(DetectorNoise { eta, nu })
    }

    pub fn deta(&self) -> f64 {
        1.0 - self.eta
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// ⟨n|Π(count)|n⟩ e^{ν} for count ∈ {0,1}.
pub fn pd_pom_diagonal(count: usize, n: usize, order: ExpansionOrder) -> BivariatePoly {
    match (count, n) {
        (0, _) => BivariatePoly::monomial(order, n, 0, re(1.0)),
        (1, 0) => BivariatePoly::monomial(order, 0, 1, re(1.0)),
        (1, _) => {
            // δη^{n−1}[n − nδη + νδη]
            let mut q = BivariatePoly::zero(order);
            q.set_coeff(0, 0, re(n as f64));
            q.set_coeff(1, 0, re(-(n as f64)));
            q.set_coeff(1, 1, re(1.0));
            BivariatePoly::monomial(order, n - 1, 0, re(1.0))
                .mul(&q)
                .expect("same order")
        }
        _ => panic!("zero-one counter has no outcome {count}"),
    }
}

/// ⟨n|Π(count)|n⟩ for n = 0..=cap at numeric (η, ν), Poisson factor included.
pub fn pd_pom_general(count: usize, eta: f64, nu: f64, cap: usize) -> Vec<f64> {
    (0..=cap)
        .map(|n| {
            (0..=count.min(n))
                .map(|m| {
                    let dark = nu.powi((count - m) as i32) / factorial(count - m);
                    dark * binomial(n, m) * eta.powi(m as i32) * (1.0 - eta).powi((n - m) as i32)
                })
                .sum::<f64>()
                * (-nu).exp()
        })
        .collect()
}

/// Polynomial part of a click-pattern probability; the true value is
/// e^{−Mν}·poly.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorProbability {
    pub modes: usize,
    pub poly: BivariatePoly,
}

impl SectorProbability {
    pub fn evaluate(&self, eta: f64, nu: f64) -> f64 {
        (-(self.modes as f64) * nu).exp() * self.poly.eval(1.0 - eta, nu).re
    }
}

/// Probability of the pattern (1,…,1,0,…,0) given photon numbers `dist`.
pub fn p_pd(dist: &NumberDistribution, n_tilde: usize, order: ExpansionOrder) -> SectorProbability {
    let mut p = BivariatePoly::one(order);
    for (i, &n) in dist.0.iter().enumerate() {
        let f = pd_pom_diagonal(usize::from(i < n_tilde), n, order);
        p = p.mul(&f).expect("same order");
    }
    SectorProbability {
        modes: dist.modes(),
        poly: p,
    }
}

/// Same probability at numeric noise, exponentials included.
pub fn p_pd_numeric(dist: &NumberDistribution, n_tilde: usize, eta: f64, nu: f64) -> f64 {
    dist.0
        .iter()
        .enumerate()
        .map(|(i, &n)| pd_pom_general(usize::from(i < n_tilde), eta, nu, n)[n])
        .product()
}

/// Sectors max(0, Ñ−max_ν) ..= Ñ+max_δη; no others reach the kept order.
pub fn sector_range(n_tilde: usize, order: ExpansionOrder) -> RangeInclusive<usize> {
    n_tilde.saturating_sub(order.max_nu)..=n_tilde + order.max_deta
}

/// Target Bell state, its detector, and the pre-rotation of mode 2.
#[derive(Debug, Clone)]
pub struct BellSpec {
    pub itf: Interferometer,
    pub n_tilde: usize,
    pub d: Vec<Complex64>,
    /// a₂ → e^{iθ} a₂ before the network.
    pub mode2_phase: f64,
}

impl BellSpec {
    /// Checks that the click pattern n^cnt in sector Ñ responds only to `d`.
    pub fn new(itf: Interferometer, d: Vec<Complex64>, mode2_phase: f64) -> Result<Self> {
        let n_tilde = d.len() - 1;
        if itf.modes() < n_tilde {
            return Err(Error::Invalid(format!(
                "{} modes cannot show {} clicks",
                itf.modes(),
                n_tilde
            )));
        }
        let norm: f64 = d.iter().map(|x| x.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("Bell amplitudes have norm² {norm}")));
        }
        let spec = BellSpec {
            itf,
            n_tilde,
            d,
            mode2_phase,
        };
        let res = spec.selectivity_residual();
        if res > SELECTIVITY_TOL {
            return Err(Error::NotSelective(res));
        }
        Ok(spec)
    }

    /// Built-in detector for |φ₋(Ñ,m)⟩; m ≠ 0 is reached through a phase shift on mode 2.
    pub fn builtin(n_tilde: usize, m: i64) -> Result<Self> {
        let itf = builtin_detector(n_tilde)?;
        let d = bell_amplitudes(n_tilde, m, 1.0)?.d;
        let theta = omega(n_tilde, m).arg();
        BellSpec::new(itf, d, theta)
    }

    pub fn modes(&self) -> usize {
        self.itf.modes()
    }

    pub fn click_pattern(&self) -> NumberDistribution {
        NumberDistribution::click_pattern(self.modes(), self.n_tilde)
    }

    /// B_k[n] including the mode-2 phase factor e^{ikθ}.
    pub fn b_coefficients(&self, sector: usize) -> BCoefficients {
        let mut b = compute_b_coefficients(&self.itf, sector);
        if self.mode2_phase != 0.0 {
            for v in b.values.iter_mut() {
                for (k, x) in v.iter_mut().enumerate() {
                    *x *= Complex64::from_polar(1.0, k as f64 * self.mode2_phase);
                }
            }
        }
        b
    }

    /// Σ_k B_k[n^cnt] d_k, the ideal click amplitude of |d⟩.
    pub fn click_amplitude(&self) -> Complex64 {
        let b = self.b_coefficients(self.n_tilde);
        let v = b.get(&self.click_pattern()).expect("pattern lies in sector Ñ");
        v.iter().zip(&self.d).map(|(b, d)| b * d).sum()
    }

    /// max_k |B_k[n^cnt] − g d*_k|: zero iff the click only sees |d⟩.
    pub fn selectivity_residual(&self) -> f64 {
        let b = self.b_coefficients(self.n_tilde);
        let v = b.get(&self.click_pattern()).expect("pattern lies in sector Ñ");
        let g: Complex64 = v.iter().zip(&self.d).map(|(b, d)| b * d).sum();
        v.iter()
            .zip(&self.d)
            .map(|(b, d)| (b - g * d.conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// |Σ_k B_k[n^cnt] d_k|²
pub fn ideal_success_probability(bell: &BellSpec) -> f64 {
    bell.click_amplitude().norm_sqr()
}

/// K_{k′k}(N) = Σ_n B*_{k′}[n] B_k[n] P_PD[n].
#[derive(Debug, Clone)]
pub struct KMatrix {
    pub sector: usize,
    pub modes: usize,
    entries: Vec<BivariatePoly>,
}

impl KMatrix {
    pub fn get(&self, kp: usize, k: usize) -> &BivariatePoly {
        &self.entries[kp * (self.sector + 1) + k]
    }

    pub fn trace(&self) -> BivariatePoly {
        let mut t = BivariatePoly::zero(self.entries[0].order());
        for k in 0..=self.sector {
            t.add_scaled(self.get(k, k), re(1.0)).expect("same order");
        }
        t
    }

    /// v† K v
    pub fn quadratic_form(&self, v: &[Complex64]) -> BivariatePoly {
        let mut t = BivariatePoly::zero(self.entries[0].order());
        for kp in 0..=self.sector {
            for k in 0..=self.sector {
                t.add_scaled(self.get(kp, k), v[kp].conj() * v[k]).expect("same order");
            }
        }
        t
    }

    /// Numeric matrix, Poisson factor e^{−Mν} restored.
    pub fn evaluate(&self, eta: f64, nu: f64) -> DMatrix<Complex64> {
        let n = self.sector + 1;
        let pre = (-(self.modes as f64) * nu).exp();
        DMatrix::from_fn(n, n, |kp, k| self.get(kp, k).eval(1.0 - eta, nu) * pre)
    }
}

pub fn build_k_matrix(bell: &BellSpec, sector: usize, order: ExpansionOrder) -> KMatrix {
    let b = bell.b_coefficients(sector);
    let dim = sector + 1;
    let mut entries = vec![BivariatePoly::zero(order); dim * dim];
    for (n, v) in b.iter() {
        let p = p_pd(n, bell.n_tilde, order).poly;
        for kp in 0..dim {
            for k in 0..dim {
                let w = v[kp].conj() * v[k];
                if w.norm() > 0.0 {
                    entries[kp * dim + k].add_scaled(&p, w).expect("same order");
                }
            }
        }
    }
    KMatrix {
        sector,
        modes: bell.modes(),
        entries,
    }
}

pub fn build_k_matrices(bell: &BellSpec, order: ExpansionOrder) -> Vec<KMatrix> {
    sector_range(bell.n_tilde, order)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| build_k_matrix(bell, n, order))
        .collect()
}

/// C = d†K(Ñ)d / Σ_N Tr K(N) as a series.
pub fn confidence_expansion(bell: &BellSpec, order: ExpansionOrder) -> Result<BivariatePoly> {
    let ks = build_k_matrices(bell, order);
    let mut den = BivariatePoly::zero(order);
    let mut num = BivariatePoly::zero(order);
    for k in &ks {
        den.add_scaled(&k.trace(), re(1.0))?;
        if k.sector == bell.n_tilde {
            num = k.quadratic_form(&bell.d);
        }
    }
    num.div(&den)
}

/// Coefficients x^{(a,b)} of a series written as 1 − Σ x^{(a,b)} δη^a ν^b.
pub fn deficit_coefficients(p: &BivariatePoly) -> Vec<((usize, usize), f64)> {
    p.order()
        .terms()
        .filter(|&t| t != (0, 0))
        .map(|(a, b)| ((a, b), -p.coeff(a, b).re))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o() -> ExpansionOrder {
        ExpansionOrder::default()
    }

    #[test]
    fn counter_polynomials() {
        assert_eq!(pd_pom_diagonal(0, 0, o()), BivariatePoly::one(o()));
        let p = pd_pom_diagonal(1, 1, o());
        assert_eq!(p.coeff(0, 0), re(1.0));
        assert_eq!(p.coeff(1, 0), re(-1.0));
        assert_eq!(p.coeff(1, 1), re(1.0));
        assert_eq!(pd_pom_diagonal(1, 0, o()), BivariatePoly::monomial(o(), 0, 1, re(1.0)));
    }

    #[test]
    fn counter_numeric() {
        assert_eq!(pd_pom_general(0, 1.0, 0.0, 0)[0], 1.0);
        assert_eq!(pd_pom_general(1, 1.0, 0.0, 2)[2], 0.0);
        let s: f64 = (0..=20).map(|c| pd_pom_general(c, 0.8, 0.1, 3)[3]).sum();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pattern_probabilities() {
        let p = p_pd(&NumberDistribution(vec![2, 0]), 1, o()).poly;
        assert_eq!(p.coeff(1, 0), re(2.0));
        assert_eq!(p.coeff(2, 0), re(-2.0));
        assert_eq!(p.coeff(2, 1), re(1.0));
        let p = p_pd(&NumberDistribution(vec![0, 0]), 1, o()).poly;
        assert_eq!(p, BivariatePoly::monomial(o(), 0, 1, re(1.0)));
    }

    #[test]
    fn ideal_probabilities() {
        let b1 = BellSpec::builtin(1, 0).unwrap();
        assert!((ideal_success_probability(&b1) - 1.0).abs() < 1e-12);
        let b2 = BellSpec::builtin(2, 0).unwrap();
        assert!((ideal_success_probability(&b2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_bell_state_not_selected() {
        let itf = builtin_detector(1).unwrap();
        let d = bell_amplitudes(1, 1, 1.0).unwrap().d;
        let spec = BellSpec {
            itf,
            n_tilde: 1,
            d,
            mode2_phase: 0.0,
        };
        assert!(ideal_success_probability(&spec) < 1e-24);
        assert!(spec.selectivity_residual() > 0.1);
    }

    #[test]
    fn displayed_product_rejected() {
        let itf = Interferometer::new(crate::interferometer::displayed_ud2_product()).unwrap();
        let d = bell_amplitudes(2, 0, 1.0).unwrap().d;
        assert!(matches!(BellSpec::new(itf, d, 0.0), Err(Error::NotSelective(_))));
    }

    #[test]
    fn k_ideal_rank_one() {
        let spec = BellSpec::builtin(1, 0).unwrap();
        let k = build_k_matrix(&spec, 1, o()).evaluate(1.0, 0.0);
        let ev = k.symmetric_eigenvalues();
        let mut e: Vec<f64> = ev.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        assert!(e[0].abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
    }
}
