//! Fock-space bookkeeping for two-mode Bell bases and M-mode detector outcomes.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon counts (n₁,…,n_M).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NumberDistribution(pub Vec<usize>);

impl NumberDistribution {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    /// ∏ nᵢ!
    pub fn factorial_product(&self) -> f64 {
        self.0.iter().map(|&n| factorial(n)).product()
    }

    /// (1,…,1,0,…,0) with `clicks` ones.
    pub fn click_pattern(modes: usize, clicks: usize) -> Self {
        NumberDistribution((0..modes).map(|i| usize::from(i < clicks)).collect())
    }
}

impl fmt::Display for NumberDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Weak compositions of `n` into `m` parts, first part descending:
/// (N,0,…,0) first, (0,…,0,N) last.
pub fn enumerate_sector(m: usize, n: usize) -> Vec<NumberDistribution> {
    assert!(m >= 1, "need at least one mode");
    let mut out = Vec::new();
    let mut cur = vec![0; m];
    fill(&mut cur, 0, n, &mut out);
    out
}

fn fill(cur: &mut Vec<usize>, i: usize, left: usize, out: &mut Vec<NumberDistribution>) {
    if i + 1 == cur.len() {
        cur[i] = left;
        out.push(NumberDistribution(cur.clone()));
        return;
    }
    for x in (0..=left).rev() {
        cur[i] = x;
        fill(cur, i + 1, left - x, out);
    }
}

/// Index of |(N,k)⟩ = |N−k⟩₁|k⟩₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoModeBasisIndex {
    pub number_sum: usize,
    pub k: usize,
}

impl TwoModeBasisIndex {
    pub fn new(number_sum: usize, k: usize) -> Self {
        assert!(k <= number_sum);
        TwoModeBasisIndex { number_sum, k }
    }

    /// Position in the sector-ordered basis {|(0,0)⟩, |(1,0)⟩, |(1,1)⟩, …}.
    pub fn flat(&self) -> usize {
        self.number_sum * (self.number_sum + 1) / 2 + self.k
    }
}

/// Dimension of the two-mode space with number-sum up to `n_max`.
pub fn two_mode_dim(n_max: usize) -> usize {
    (n_max + 1) * (n_max + 2) / 2
}

/// ω_{N+1}^p = exp(i2πp/(N+1)).
pub fn omega(n: usize, p: i64) -> Complex64 {
    let t = 2.0 * PI * (p.rem_euclid(n as i64 + 1)) as f64 / (n as f64 + 1.0);
    Complex64::from_polar(1.0, t)
}

/// Normalization of D(N,r) Σ r^k |N−k,k⟩.
pub fn bell_norm(n: usize, r: f64) -> f64 {
    let s: f64 = (0..=n).map(|k| r.powi(2 * k as i32)).sum();
    1.0 / s.sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellAmplitudes {
    pub number_sum: usize,
    pub phase_index: usize,
    pub scale: f64,
    pub d: Vec<Complex64>,
}

fn check_phase(n: usize, m: i64) -> Result<usize> {
    if m < 0 || m as usize > n {
        return Err(Error::PhaseIndex { m, n });
    }
    Ok(m as usize)
}

/// d_k = D(N,r) r^k ω^{−mk}.
pub fn bell_amplitudes(n: usize, m: i64, r: f64) -> Result<BellAmplitudes> {
    let mi = check_phase(n, m)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Scale(r));
    }
    let dn = bell_norm(n, r);
    let d = (0..=n)
        .map(|k| omega(n, -(m * k as i64)) * (dn * r.powi(k as i32)))
        .collect();
    Ok(BellAmplitudes {
        number_sum: n,
        phase_index: mi,
        scale: r,
        d,
    })
}

/// Phase state Σ ω^{mn}|n⟩/√(N+1).
pub fn phase_state(n: usize, m: i64) -> Result<Vec<Complex64>> {
    check_phase(n, m)?;
    let s = 1.0 / ((n + 1) as f64).sqrt();
    Ok((0..=n).map(|j| omega(n, m * j as i64) * s).collect())
}

/// N̂₊ on the two-mode space truncated at number-sum `n_max`.
pub fn build_number_sum_operator(n_max: usize) -> DMatrix<Complex64> {
    let dim = two_mode_dim(n_max);
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..=n_max {
        for k in 0..=n {
            let i = TwoModeBasisIndex::new(n, k).flat();
            h[(i, i)] = Complex64::new(n as f64, 0.0);
        }
    }
    h
}

/// Φ̂₋ = Σ_{N,m} 2πm/(N+1) |φ₋(N,m)⟩⟨φ₋(N,m)|.
pub fn build_phase_difference_operator(n_max: usize) -> DMatrix<Complex64> {
    let dim = two_mode_dim(n_max);
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..=n_max {
        let base = TwoModeBasisIndex::new(n, 0).flat();
        for m in 1..=n {
            let ev = 2.0 * PI * m as f64 / (n as f64 + 1.0);
            let d = bell_amplitudes(n, m as i64, 1.0).expect("m within range").d;
            for (a, da) in d.iter().enumerate() {
                for (b, db) in d.iter().enumerate() {
                    h[(base + a, base + b)] += da * db.conj() * ev;
                }
            }
        }
    }
    h
}

/// Embeds sector-N amplitudes into the flat two-mode vector.
pub fn embed_sector(n_max: usize, n: usize, d: &[Complex64]) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); two_mode_dim(n_max)];
    let base = TwoModeBasisIndex::new(n, 0).flat();
    v[base..base + d.len()].copy_from_slice(d);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() < 1e-12
    }

    #[test]
    fn small_sectors() {
        let s = enumerate_sector(2, 1);
        assert_eq!(s, vec![NumberDistribution(vec![1, 0]), NumberDistribution(vec![0, 1])]);
        assert_eq!(enumerate_sector(3, 2).len(), 6);
        assert_eq!(enumerate_sector(3, 0), vec![NumberDistribution(vec![0, 0, 0])]);
    }

    #[test]
    fn bell_examples() {
        let h = 1.0 / 2f64.sqrt();
        let d = bell_amplitudes(1, 0, 1.0).unwrap().d;
        assert!(close(d[0], h) && close(d[1], h));
        let d = bell_amplitudes(1, 1, 1.0).unwrap().d;
        assert!(close(d[0], h) && close(d[1], -h));
        let d = bell_amplitudes(2, 0, 1.0).unwrap().d;
        assert!(d.iter().all(|&x| close(x, 1.0 / 3f64.sqrt())));
        assert!(bell_amplitudes(1, 2, 1.0).is_err());
        assert!(bell_amplitudes(1, -1, 1.0).is_err());
    }

    #[test]
    fn generalized_scale_normalized() {
        for &r in &[0.25, 1.0, 4.0] {
            let d = bell_amplitudes(3, 1, r).unwrap().d;
            let n: f64 = d.iter().map(|x| x.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        // D(1,r)·r approaches 1 for large r
        let r = 1e4;
        assert!((bell_norm(1, r) * r - 1.0).abs() < 1e-8);
    }

    #[test]
    fn phase_states() {
        let h = 1.0 / 2f64.sqrt();
        let p = phase_state(1, 1).unwrap();
        assert!(close(p[0], h) && close(p[1], -h));
        let p = phase_state(2, 0).unwrap();
        assert!(p.iter().all(|&x| close(x, 1.0 / 3f64.sqrt())));
    }

    #[test]
    fn phase_operator_eigen() {
        let phi = build_phase_difference_operator(3);
        let d = bell_amplitudes(1, 1, 1.0).unwrap().d;
        let v = nalgebra::DVector::from_vec(embed_sector(3, 1, &d));
        let w = &phi * &v;
        assert!((w - v * Complex64::new(PI, 0.0)).norm() < 1e-12);
        assert_eq!(phi[(0, 0)], Complex64::new(0.0, 0.0));
        let n = build_number_sum_operator(3);
        assert!((&phi * &n - &n * &phi).norm() < 1e-12);
    }
}
