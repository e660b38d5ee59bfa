//! Brute-force numeric path at fixed (η, ν), no series arithmetic.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::detector::{p_pd_numeric, BellSpec};
use crate::fock::{embed_sector, two_mode_dim, TwoModeBasisIndex};
use crate::interferometer::b_coefficients_tuple_sum;
use crate::teleport::{Input, ManipulationSpec};

/// Γ on the two-mode space {|(N,k)⟩ : N ≤ n_max}.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub n_max: usize,
    pub matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Largest |Γ| entry linking different number-sums.
    pub fn cross_sector_max(&self) -> f64 {
        let sector_of = |i: usize| {
            let mut n = 0;
            while TwoModeBasisIndex::new(n + 1, 0).flat() <= i {
                n += 1;
            }
            n
        };
        let dim = self.matrix.nrows();
        let mut m: f64 = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                if sector_of(i) != sector_of(j) {
                    m = m.max(self.matrix[(i, j)].norm());
                }
            }
        }
        m
    }

    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let dim = self.matrix.nrows();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                s += v[i].conj() * self.matrix[(i, j)] * v[j];
            }
        }
        s
    }
}

pub fn default_n_max(n_tilde: usize) -> usize {
    n_tilde + 6
}

/// Γ = Σ_n P_PD[n] U†|n⟩⟨n|U restricted to signal ports.
pub fn dense_gamma(bell: &BellSpec, eta: f64, nu: f64, n_max: usize) -> DenseOperator {
    let dim = two_mode_dim(n_max);
    let mut g = DMatrix::zeros(dim, dim);
    for sector in 0..=n_max {
        let b = b_coefficients_tuple_sum(&bell.itf, sector);
        let base = TwoModeBasisIndex::new(sector, 0).flat();
        for (n, v) in b.iter() {
            let p = p_pd_numeric(n, bell.n_tilde, eta, nu);
            let ph: Vec<Complex64> = (0..=sector)
                .map(|k| v[k] * Complex64::from_polar(1.0, k as f64 * bell.mode2_phase))
                .collect();
            for kp in 0..=sector {
                for k in 0..=sector {
                    g[(base + kp, base + k)] += ph[kp].conj() * ph[k] * p;
                }
            }
        }
    }
    DenseOperator { n_max, matrix: g }
}

pub fn dense_confidence(bell: &BellSpec, eta: f64, nu: f64, n_max: usize) -> f64 {
    let g = dense_gamma(bell, eta, nu, n_max);
    let v = embed_sector(n_max, bell.n_tilde, &bell.d);
    g.expectation(&v).re / g.matrix.trace().re
}

/// Unnormalized output ρ_out over (kept, rest) and the ideal vector.
pub fn dense_output(
    spec: &ManipulationSpec,
    eta: f64,
    nu: f64,
    n_max: usize,
) -> (DMatrix<Complex64>, Vec<Complex64>) {
    let kd = spec.resource.row_dim();
    let (rd, inp): (usize, Vec<(usize, usize, Complex64)>) = match &spec.input {
        Input::Single(s) => (1, s.amps.iter().enumerate().map(|(k, &a)| (k, 0, a)).collect()),
        Input::TwoMode(e) => (
            e.perm.len(),
            (0..e.perm.len()).map(|l| (e.perm[l], l, e.weight[l])).collect(),
        ),
    };
    let dim = kd * rd;
    let mut rho = DMatrix::zeros(dim, dim);
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    let nt = spec.bell.n_tilde;
    let cnt = spec.bell.click_pattern();
    for sector in 0..=n_max {
        let b = b_coefficients_tuple_sum(&spec.bell.itf, sector);
        for (n, v) in b.iter() {
            let mut c = vec![Complex64::new(0.0, 0.0); dim];
            for l in 0..spec.resource.perm.len() {
                if l > sector {
                    break;
                }
                let k = sector - l;
                let bk = v[k] * Complex64::from_polar(1.0, k as f64 * spec.bell.mode2_phase);
                for &(ki, rest, a) in &inp {
                    if ki == k {
                        c[spec.resource.perm[l] * rd + rest] += spec.resource.weight[l] * bk * a;
                    }
                }
            }
            let p = p_pd_numeric(n, nt, eta, nu);
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] += c[i] * c[j].conj() * p;
                }
            }
            if *n == cnt {
                psi = c;
            }
        }
    }
    (rho, psi)
}

/// Tr[ρ|ψ⟩⟨ψ|] / (Tr ρ · ⟨ψ|ψ⟩) evaluated directly.
pub fn dense_fidelity(spec: &ManipulationSpec, eta: f64, nu: f64, n_max: usize) -> f64 {
    let (rho, psi) = dense_output(spec, eta, nu, n_max);
    let dim = psi.len();
    let mut num = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            num += psi[i].conj() * rho[(i, j)] * psi[j];
        }
    }
    let tp: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    num.re / (rho.trace().re * tp)
}
