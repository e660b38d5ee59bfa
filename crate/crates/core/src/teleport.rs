//! Teleportation-based state manipulation through an imperfect Bell detector.
//!
//! The detector sees resource mode 0 in its first port and the input's
//! measured mode in its second port. After outcome n with total photon
//! number N, the kept resource mode holds |s(N−k)⟩ with weight
//! E_{N−k} B_k[n] c^in_k.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{p_pd, p_pd_numeric, sector_range, BellSpec};
use crate::error::{Error, Result};
use crate::fock::NumberDistribution;
use crate::poly::{BivariatePoly, ExpansionOrder};
use crate::sources::{
    coherent_state, generalized_bell_resource, squeezed_vacuum, truncated_msv, EprMatrix,
    SingleModeState,
};

/// Sectors beyond Ñ summed for numeric probabilities.
pub const NUMERIC_GUARD: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Scissors,
    Reversal,
    GeneralizedBellPrep,
    MsvPrep,
    Custom,
}

/// State entering the detector's second port.
#[derive(Debug, Clone)]
pub enum Input {
    Single(SingleModeState),
    /// Two-mode input: the row index l′ = s(l) is measured, l stays as an output mode.
    TwoMode(EprMatrix),
}

impl Input {
    /// (k, rest, amplitude) triples with k the measured photon number.
    fn terms(&self) -> Vec<(usize, usize, Complex64)> {
        match self {
            Input::Single(s) => s
                .amps
                .iter()
                .enumerate()
                .map(|(k, &a)| (k, 0, a))
                .collect(),
            Input::TwoMode(e) => e
                .perm
                .iter()
                .zip(&e.weight)
                .enumerate()
                .map(|(l, (&s, &w))| (s, l, w))
                .collect(),
        }
    }

    fn rest_dim(&self) -> usize {
        match self {
            Input::Single(_) => 1,
            Input::TwoMode(e) => e.perm.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ManipulationSpec {
    pub input: Input,
    pub resource: EprMatrix,
    pub bell: BellSpec,
    pub label: Label,
}

/// Output vectors over (kept, rest) stored kept-major.
#[derive(Debug, Clone)]
pub struct OutcomeAmplitudes {
    pub kept_dim: usize,
    pub rest_dim: usize,
    pub outcomes: Vec<(NumberDistribution, Vec<Complex64>)>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

impl ManipulationSpec {
    pub fn kept_dim(&self) -> usize {
        self.resource.row_dim()
    }

    pub fn rest_dim(&self) -> usize {
        self.input.rest_dim()
    }

    /// c^out[n] for every outcome of one sector.
    pub fn sector_amplitudes(&self, sector: usize) -> Vec<(NumberDistribution, Vec<Complex64>)> {
        let b = self.bell.b_coefficients(sector);
        let (kd, rd) = (self.kept_dim(), self.rest_dim());
        let terms: Vec<_> = self.input.terms().into_iter().filter(|t| t.0 <= sector).collect();
        b.iter()
            .map(|(n, bv)| {
                let mut c = vec![Complex64::new(0.0, 0.0); kd * rd];
                for &(k, rest, a) in &terms {
                    let l = sector - k;
                    if let Some(s) = self.resource.s(l) {
                        c[s * rd + rest] += self.resource.e(l) * bv[k] * a;
                    }
                }
                (n.clone(), c)
            })
            .collect()
    }

    pub fn outcome_amplitudes(&self, sectors: impl Iterator<Item = usize>) -> OutcomeAmplitudes {
        let list: Vec<usize> = sectors.collect();
        let outcomes = list
            .par_iter()
            .map(|&n| self.sector_amplitudes(n))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        OutcomeAmplitudes {
            kept_dim: self.kept_dim(),
            rest_dim: self.rest_dim(),
            outcomes,
        }
    }

    /// Unnormalized c^out[n^cnt].
    pub fn ideal_amplitudes(&self) -> Vec<Complex64> {
        let cnt = self.bell.click_pattern();
        self.sector_amplitudes(self.bell.n_tilde)
            .into_iter()
            .find(|(n, _)| *n == cnt)
            .map(|(_, c)| c)
            .expect("click pattern lies in sector Ñ")
    }
}

/// T[n] = E·R_N·B[n]: maps c^in_k (k = 0..=N) to the kept index.
pub fn transform_matrix(spec: &ManipulationSpec, dist: &NumberDistribution) -> DMatrix<Complex64> {
    let sector = dist.total();
    let b = spec.bell.b_coefficients(sector);
    let bv = b.get(dist).expect("distribution has the detector's mode count");
    let mut t = DMatrix::zeros(spec.kept_dim(), sector + 1);
    for (k, &bk) in bv.iter().enumerate() {
        let l = sector - k;
        if let Some(s) = spec.resource.s(l) {
            t[(s, k)] = spec.resource.e(l) * bk;
        }
    }
    t
}

/// Normalized ideal output, phase fixed so the first nonzero entry is real positive.
pub fn ideal_output(spec: &ManipulationSpec) -> Result<Vec<Complex64>> {
    let c = spec.ideal_amplitudes();
    let n = norm_sqr(&c).sqrt();
    if n < 1e-300 {
        return Err(Error::Degenerate);
    }
    let first = c.iter().find(|x| x.norm() > 1e-14 * n).copied().unwrap_or(Complex64::new(1.0, 0.0));
    let ph = first.conj() / first.norm();
    Ok(c.iter().map(|x| x * ph / n).collect())
}

/// F = Σ P|c[n]·c[n^cnt]|² / (Σ P‖c[n]‖² · ‖c[n^cnt]‖²) as a series.
pub fn fidelity_expansion(spec: &ManipulationSpec, order: ExpansionOrder) -> Result<BivariatePoly> {
    let psi = spec.ideal_amplitudes();
    let tp = norm_sqr(&psi);
    if tp < 1e-300 {
        return Err(Error::Degenerate);
    }
    let nt = spec.bell.n_tilde;
    let out = spec.outcome_amplitudes(sector_range(nt, order));
    let mut num = BivariatePoly::zero(order);
    let mut den = BivariatePoly::zero(order);
    for (n, c) in &out.outcomes {
        let w = norm_sqr(c);
        if w == 0.0 {
            continue;
        }
        let p = p_pd(n, nt, order).poly;
        num.add_scaled(&p, Complex64::new(dot(c, &psi).norm_sqr() / tp, 0.0))?;
        den.add_scaled(&p, Complex64::new(w, 0.0))?;
    }
    num.div(&den)
}

/// e^{−Mν} Σ_n P_PD[n] ‖c[n]‖² over sectors 0..=Ñ+NUMERIC_GUARD.
pub fn success_probability(spec: &ManipulationSpec, eta: f64, nu: f64) -> f64 {
    let nt = spec.bell.n_tilde;
    let out = spec.outcome_amplitudes(0..=nt + NUMERIC_GUARD);
    out.outcomes
        .iter()
        .map(|(n, c)| p_pd_numeric(n, nt, eta, nu) * norm_sqr(c))
        .sum()
}

/// Ideal-detector success, ‖c[n^cnt]‖².
pub fn ideal_success(spec: &ManipulationSpec) -> f64 {
    norm_sqr(&spec.ideal_amplitudes())
}

/// Input levels needed for an expansion of the given order, with two guard levels.
pub fn default_levels(n_tilde: usize, order: ExpansionOrder) -> usize {
    n_tilde + order.max_deta + 2
}

/// Coherent input truncated to ≤ N through a resource Σ_{l≤N}|N−l⟩|l⟩/√(N+1).
pub fn scissors(n: usize, alpha: Complex64, levels: usize) -> Result<ManipulationSpec> {
    Ok(ManipulationSpec {
        input: Input::Single(coherent_state(alpha, levels)),
        resource: generalized_bell_resource(n, 0, 1.0)?,
        bell: BellSpec::builtin(n, 0)?,
        label: Label::Scissors,
    })
}

/// Coherent input with amplitudes reversed c_n → c_{N−n}, resource |λ=1,N⟩.
pub fn reversal(n: usize, alpha: Complex64, levels: usize) -> Result<ManipulationSpec> {
    Ok(ManipulationSpec {
        input: Input::Single(coherent_state(alpha, levels)),
        resource: truncated_msv(n),
        bell: BellSpec::builtin(n, 0)?,
        label: Label::Reversal,
    })
}

/// Two squeezed vacua |λ⟩ (input) and |λ′⟩ (resource) swapped into a
/// number-sum-N Bell state.
pub fn generalized_bell_prep(
    n: usize,
    lambda: f64,
    lambda_res: f64,
    levels: usize,
) -> Result<ManipulationSpec> {
    Ok(ManipulationSpec {
        input: Input::TwoMode(squeezed_vacuum(lambda, levels)?),
        resource: squeezed_vacuum(lambda_res, levels)?,
        bell: BellSpec::builtin(n, 0)?,
        label: Label::GeneralizedBellPrep,
    })
}

/// |φ₋(N,0,1/λ)⟩ (input) with |λ⟩ (resource) giving |λ=1,N⟩.
pub fn msv_prep(n: usize, lambda: f64, levels: usize) -> Result<ManipulationSpec> {
    if !(lambda > 0.0) {
        return Err(Error::Squeezing(lambda));
    }
    Ok(ManipulationSpec {
        input: Input::TwoMode(generalized_bell_resource(n, 0, 1.0 / lambda)?),
        resource: squeezed_vacuum(lambda, levels)?,
        bell: BellSpec::builtin(n, 0)?,
        label: Label::MsvPrep,
    })
}

/// msv_prep with input and resource exchanged.
pub fn msv_prep_swapped(n: usize, lambda: f64, levels: usize) -> Result<ManipulationSpec> {
    if !(lambda > 0.0) {
        return Err(Error::Squeezing(lambda));
    }
    Ok(ManipulationSpec {
        input: Input::TwoMode(squeezed_vacuum(lambda, levels)?),
        resource: generalized_bell_resource(n, 0, 1.0 / lambda)?,
        bell: BellSpec::builtin(n, 0)?,
        label: Label::Custom,
    })
}

/// Cuts a single-mode input to ≤ N and renormalizes it, so only detector and
/// resource weights enter the ideal success.
fn normalized_single(spec: &mut ManipulationSpec, n: usize) -> Result<()> {
    if let Input::Single(s) = &spec.input {
        spec.input = Input::Single(s.truncated_normalized(n)?);
    }
    Ok(())
}

/// Ideal-detector probability of preparing |φ₋(N,0,r)⟩ from |λ⟩|λ′⟩.
pub fn net_success_gb(n: usize, lambda: f64, lambda_res: f64) -> Result<f64> {
    Ok(ideal_success(&generalized_bell_prep(n, lambda, lambda_res, n + NUMERIC_GUARD)?))
}

/// Resource preparation from |λ⟩|λ⟩ followed by the scissors step.
pub fn net_success_scissors(n: usize, alpha: Complex64, lambda: f64) -> Result<f64> {
    let mut sc = scissors(n, alpha, n)?;
    normalized_single(&mut sc, n)?;
    Ok(net_success_gb(n, lambda, lambda)? * ideal_success(&sc))
}

/// |φ₋(N,0,1/λ)⟩ prepared from |λ₁⟩|λ₂⟩ (λ₂/λ₁ = 1/λ), then turned into
/// |λ=1,N⟩ with |λ⟩.
pub fn net_success_msv(n: usize, lambda: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    let prep = net_success_gb(n, lambda1, lambda2)?;
    Ok(prep * ideal_success(&msv_prep(n, lambda, n + NUMERIC_GUARD)?))
}

/// Reversal through a |λ=1,N⟩ resource obtained as in [`net_success_msv`].
pub fn net_success_reversal(
    n: usize,
    alpha: Complex64,
    lambda: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<f64> {
    let mut rv = reversal(n, alpha, n)?;
    normalized_single(&mut rv, n)?;
    Ok(net_success_msv(n, lambda, lambda1, lambda2)? * ideal_success(&rv))
}
