//! Single-mode inputs and permutation-structured two-mode EPR resources.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{bell_norm, factorial, omega};

/// Amplitudes c_n for n = 0..=n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleModeState {
    pub amps: Vec<Complex64>,
}

impl SingleModeState {
    pub fn new(amps: Vec<Complex64>) -> Self {
        SingleModeState { amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn n_max(&self) -> usize {
        self.amps.len().saturating_sub(1)
    }

    /// Keeps levels ≤ n and rescales to unit norm.
    pub fn truncated_normalized(&self, n: usize) -> Result<Self> {
        let amps: Vec<_> = self.amps.iter().take(n + 1).copied().collect();
        let s = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if s == 0.0 {
            return Err(Error::Degenerate);
        }
        Ok(SingleModeState::new(amps.into_iter().map(|c| c / s).collect()))
    }
}

/// c_n = e^{−|α|²/2} αⁿ/√(n!)
pub fn coherent_state(alpha: Complex64, n_max: usize) -> SingleModeState {
    let pre = (-alpha.norm_sqr() / 2.0).exp();
    let amps = (0..=n_max)
        .map(|n| alpha.powu(n as u32) * (pre / factorial(n).sqrt()))
        .collect();
    SingleModeState { amps }
}

/// E_{l′l} = δ_{l′ s(l)} E_l, stored column-wise: `perm[l] = s(l)`, `weight[l] = E_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct EprMatrix {
    pub perm: Vec<usize>,
    pub weight: Vec<Complex64>,
}

impl EprMatrix {
    pub fn new(perm: Vec<usize>, weight: Vec<Complex64>) -> Result<Self> {
        if perm.len() != weight.len() {
            return Err(Error::Invalid("permutation and weights differ in length".into()));
        }
        let mut seen = vec![false; perm.iter().copied().max().map_or(0, |m| m + 1)];
        for &s in &perm {
            if seen[s] {
                return Err(Error::Invalid(format!("row {s} hit twice; s(l) must be injective")));
            }
            seen[s] = true;
        }
        Ok(EprMatrix { perm, weight })
    }

    pub fn max_l(&self) -> usize {
        self.perm.len().saturating_sub(1)
    }

    /// Number of rows (l′ values) the matrix can reach.
    pub fn row_dim(&self) -> usize {
        self.perm.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn s(&self, l: usize) -> Option<usize> {
        self.perm.get(l).copied()
    }

    pub fn e(&self, l: usize) -> Complex64 {
        self.weight.get(l).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.weight.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_injective(&self) -> bool {
        let mut v = self.perm.clone();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    }

    /// Full matrix E_{l′l}.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let rows = self.row_dim();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); self.perm.len()]; rows];
        for (l, (&s, &e)) in self.perm.iter().zip(&self.weight).enumerate() {
            m[s][l] = e;
        }
        m
    }

    /// E† E, diagonal by injectivity.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        self.weight.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// √(1−λ²) Σ λ^l |l,l⟩, cut at `l_max`.
pub fn squeezed_vacuum(lambda: f64, l_max: usize) -> Result<EprMatrix> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Squeezing(lambda));
    }
    let pre = (1.0 - lambda * lambda).sqrt();
    let weight = (0..=l_max)
        .map(|l| Complex64::new(pre * lambda.powi(l as i32), 0.0))
        .collect();
    EprMatrix::new((0..=l_max).collect(), weight)
}

/// Number-sum-N resource Σ_l D r^l ω^{−ml} |N−l⟩|l⟩: s(l) = N−l.
pub fn generalized_bell_resource(n: usize, m: i64, r: f64) -> Result<EprMatrix> {
    if m < 0 || m as usize > n {
        return Err(Error::PhaseIndex { m, n });
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Scale(r));
    }
    let d = bell_norm(n, r);
    let weight = (0..=n)
        .map(|l| omega(n, -(m * l as i64)) * (d * r.powi(l as i32)))
        .collect();
    EprMatrix::new((0..=n).map(|l| n - l).collect(), weight)
}

/// Σ_{l≤N} |l,l⟩/√(N+1).
pub fn truncated_msv(n: usize) -> EprMatrix {
    let w = 1.0 / ((n + 1) as f64).sqrt();
    EprMatrix::new((0..=n).collect(), vec![Complex64::new(w, 0.0); n + 1])
        .expect("identity permutation is injective")
}

/// Σ_{l>l_max} |E_l|² for the squeezed vacuum.
pub fn squeezed_tail(lambda: f64, l_max: usize) -> f64 {
    lambda.powi(2 * (l_max as i32 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::bell_amplitudes;

    #[test]
    fn coherent_examples() {
        let v = coherent_state(Complex64::new(0.0, 0.0), 4);
        assert_eq!(v.amps[0], Complex64::new(1.0, 0.0));
        assert!(v.amps[1..].iter().all(|c| c.norm() == 0.0));
        let a = coherent_state(Complex64::new(3f64.sqrt(), 0.0), 10);
        assert!((a.amps[0].norm_sqr() - (-3f64).exp()).abs() < 1e-15);
        let b = coherent_state(Complex64::new(3.0, 0.0), 40);
        assert!((b.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn squeezed_examples() {
        let z = squeezed_vacuum(0.0, 3).unwrap();
        assert_eq!(z.e(0), Complex64::new(1.0, 0.0));
        assert!(z.weight[1..].iter().all(|c| c.norm() == 0.0));
        let q = squeezed_vacuum(0.25, 8).unwrap();
        assert!((q.e(0).re - 15f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((q.e(1).re - 15f64.sqrt() / 16.0).abs() < 1e-15);
        assert!((q.norm_sqr() + squeezed_tail(0.25, 8) - 1.0).abs() < 1e-14);
        assert!(squeezed_vacuum(1.0, 3).is_err());
    }

    #[test]
    fn bell_resource_matches_amplitudes() {
        for &(n, r) in &[(1, 1.0), (2, 1.0), (2, 4.0), (3, 0.5)] {
            let e = generalized_bell_resource(n, 0, r).unwrap();
            let d = bell_amplitudes(n, 0, r).unwrap().d;
            for l in 0..=n {
                assert_eq!(e.s(l), Some(n - l));
                assert!((e.e(l) - d[l]).norm() < 1e-14);
            }
        }
        let e = generalized_bell_resource(1, 0, 1.0).unwrap();
        assert!((e.e(0).re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn msv_examples() {
        let t = truncated_msv(2);
        assert!(t.weight.iter().all(|c| (c.re - 1.0 / 3f64.sqrt()).abs() < 1e-15));
        assert_eq!(truncated_msv(0).weight, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn injectivity_enforced() {
        let w = vec![Complex64::new(1.0, 0.0); 2];
        assert!(EprMatrix::new(vec![0, 0], w).is_err());
    }
}
