//! `bellsim` command line: coefficient tables, curves, checks and mesh layouts.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{
    confidence_expansion, deficit_coefficients, ideal_success_probability, BellSpec,
};
use crate::error::{Error, Result};
use crate::fock::bell_amplitudes;
use crate::interferometer::{
    b_coefficients_tuple_sum, builtin_detector, compute_b_coefficients, decompose_reck,
    reconstruct, Interferometer, OpticalElement,
};
use crate::oracle::{default_n_max, dense_confidence, dense_fidelity, dense_gamma};
use crate::poly::{BivariatePoly, ExpansionOrder};
use crate::teleport::{
    default_levels, fidelity_expansion, generalized_bell_prep, msv_prep, msv_prep_swapped,
    reversal, scissors, success_probability, ManipulationSpec,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bellsim", version, about = "Imperfect number-sum Bell detectors and teleportation fidelity")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Confidence series of a built-in detector and C(η,ν) samples.
    Confidence(ConfidenceArgs),
    /// Fidelity series of a manipulation scenario and F(η,ν) samples.
    Fidelity(FidelityArgs),
    /// Cross-checks and reference tables; exit 3 on any failure.
    Verify,
    /// Beam-splitter mesh of a detector matrix.
    Decompose(DecomposeArgs),
    /// Dense η sweep of confidence (--n) or fidelity (--scenario).
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct Grid {
    /// Comma-separated η values.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Comma-separated ν values.
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct ConfidenceArgs {
    #[arg(long)]
    n: usize,
    /// Expansion order as A,B (max δη power, max ν power).
    #[arg(long, value_parser = parse_order)]
    order: Option<ExpansionOrder>,
    #[command(flatten)]
    grid: Grid,
    /// Write the coefficient table as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FidelityArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_parser = parse_order)]
    order: Option<ExpansionOrder>,
    #[command(flatten)]
    grid: Grid,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    /// Built-in detector for number-sum N.
    #[arg(long, conflicts_with = "matrix")]
    n: Option<usize>,
    /// JSON file {"M", "U_re", "U_im"}.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, conflicts_with = "scenario")]
    n: Option<usize>,
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, value_parser = parse_order)]
    order: Option<ExpansionOrder>,
    /// Number of η points between 0.5 and 1.
    #[arg(long, default_value_t = 51)]
    steps: usize,
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_order(s: &str) -> std::result::Result<ExpansionOrder, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected A,B, got {s:?}"));
    }
    let a = parts[0].trim().parse().map_err(|e| format!("A: {e}"))?;
    let b = parts[1].trim().parse().map_err(|e| format!("B: {e}"))?;
    Ok(ExpansionOrder::new(a, b))
}

/// Complex α given as a number or as [re, im].
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Pair([f64; 2]),
}

impl Amplitude {
    pub fn value(self) -> Complex64 {
        match self {
            Amplitude::Real(x) => Complex64::new(x, 0.0),
            Amplitude::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Manipulation {
    Scissors,
    Reversal,
    GeneralizedBellPrep,
    MsvPrep,
    MsvPrepSwapped,
}

/// Scenario file contents.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub manipulation: Manipulation,
    pub n: usize,
    #[serde(default)]
    pub alpha: Option<Amplitude>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub lambda_resource: Option<f64>,
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default)]
    pub order: Option<[usize; 2]>,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default)]
    pub nu: Option<Vec<f64>>,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn order(&self) -> ExpansionOrder {
        self.order
            .map(|[a, b]| ExpansionOrder::new(a, b))
            .unwrap_or_default()
    }

    fn need<T>(v: Option<T>, field: &str, m: Manipulation) -> Result<T> {
        v.ok_or_else(|| Error::Invalid(format!("field `{field}` is required for {m:?}")))
    }

    pub fn build(&self, order: ExpansionOrder) -> Result<ManipulationSpec> {
        let levels = self.levels.unwrap_or_else(|| default_levels(self.n, order));
        let m = self.manipulation;
        match m {
            Manipulation::Scissors => scissors(self.n, Self::need(self.alpha, "alpha", m)?.value(), levels),
            Manipulation::Reversal => reversal(self.n, Self::need(self.alpha, "alpha", m)?.value(), levels),
            Manipulation::GeneralizedBellPrep => generalized_bell_prep(
                self.n,
                Self::need(self.lambda, "lambda", m)?,
                Self::need(self.lambda_resource, "lambda_resource", m)?,
                levels,
            ),
            Manipulation::MsvPrep => msv_prep(self.n, Self::need(self.lambda, "lambda", m)?, levels),
            Manipulation::MsvPrepSwapped => {
                msv_prep_swapped(self.n, Self::need(self.lambda, "lambda", m)?, levels)
            }
        }
    }
}

/// Up to 15 significant digits, trailing zeros dropped.
pub fn fmt15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { format!("{x}") };
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..15).contains(&e) {
        let s = format!("{:.*}", (14 - e).max(0) as usize, x);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{:.14e}", x)
    }
}

#[derive(Debug, Serialize)]
struct CoefficientRow {
    a: usize,
    b: usize,
    value: f64,
}

#[derive(Debug, Serialize)]
struct CoefficientTable<'a> {
    quantity: &'a str,
    n: usize,
    order: [usize; 2],
    /// Series written as 1 − Σ value·δη^a ν^b.
    coefficients: Vec<CoefficientRow>,
}

fn write_table(path: &Path, quantity: &str, n: usize, p: &BivariatePoly) -> Result<()> {
    let o = p.order();
    let t = CoefficientTable {
        quantity,
        n,
        order: [o.max_deta, o.max_nu],
        coefficients: deficit_coefficients(p)
            .into_iter()
            .map(|((a, b), value)| CoefficientRow { a, b, value })
            .collect(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&t)? + "\n")?;
    Ok(())
}

fn print_coefficients(out: &mut dyn Write, col: &str, p: &BivariatePoly) -> std::io::Result<()> {
    writeln!(out, "a,b,{col}")?;
    for ((a, b), v) in deficit_coefficients(p) {
        writeln!(out, "{a},{b},{}", fmt15(v))?;
    }
    Ok(())
}

/// |highest-δη terms| / |all corrections| at the evaluation point.
pub fn truncation_quality(p: &BivariatePoly, deta: f64, nu: f64) -> f64 {
    let o = p.order();
    let mut top = Complex64::new(0.0, 0.0);
    let mut all = Complex64::new(0.0, 0.0);
    for (a, b) in o.terms() {
        if (a, b) == (0, 0) {
            continue;
        }
        let t = p.coeff(a, b) * deta.powi(a as i32) * nu.powi(b as i32);
        all += t;
        if a == o.max_deta {
            top += t;
        }
    }
    if all.norm() == 0.0 {
        0.0
    } else {
        top.norm() / all.norm()
    }
}

fn default_etas() -> Vec<f64> {
    (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect()
}

fn default_nus() -> Vec<f64> {
    vec![0.0, 0.05, 0.1]
}

fn check_grid(etas: &[f64], nus: &[f64]) -> Result<()> {
    if let Some(e) = etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::Invalid(format!("η = {e} outside [0,1]")));
    }
    if let Some(v) = nus.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Invalid(format!("ν = {v} is negative")));
    }
    Ok(())
}

fn grid_points(etas: &[f64], nus: &[f64]) -> Vec<(f64, f64)> {
    nus.iter().flat_map(|&nu| etas.iter().map(move |&e| (e, nu))).collect()
}

fn cmd_confidence(a: ConfidenceArgs, out: &mut dyn Write) -> Result<()> {
    let order = a.order.unwrap_or_default();
    let bell = BellSpec::builtin(a.n, 0)?;
    let c = confidence_expansion(&bell, order)?;
    let etas = a.grid.eta.unwrap_or_else(default_etas);
    let nus = a.grid.nu.unwrap_or_else(default_nus);
    check_grid(&etas, &nus)?;
    print_coefficients(out, "q", &c)?;
    writeln!(out)?;
    writeln!(out, "eta,nu,C,C_dense,truncation_quality")?;
    let nmax = default_n_max(a.n);
    let rows: Vec<_> = grid_points(&etas, &nus)
        .into_par_iter()
        .map(|(e, v)| {
            let s = c.eval(1.0 - e, v).re;
            let d = dense_confidence(&bell, e, v, nmax);
            (e, v, s, d, truncation_quality(&c, 1.0 - e, v))
        })
        .collect();
    for (e, v, s, d, q) in rows {
        writeln!(out, "{},{},{},{},{}", fmt15(e), fmt15(v), fmt15(s), fmt15(d), fmt15(q))?;
    }
    if let Some(p) = a.out {
        write_table(&p, "confidence", a.n, &c)?;
    }
    Ok(())
}

fn cmd_fidelity(a: FidelityArgs, out: &mut dyn Write) -> Result<()> {
    let sc = Scenario::from_path(&a.scenario)?;
    let order = a.order.unwrap_or_else(|| sc.order());
    let spec = sc.build(order)?;
    let f = fidelity_expansion(&spec, order)?;
    let etas = a.grid.eta.or(sc.eta.clone()).unwrap_or_else(default_etas);
    let nus = a.grid.nu.or(sc.nu.clone()).unwrap_or_else(default_nus);
    check_grid(&etas, &nus)?;
    print_coefficients(out, "f", &f)?;
    writeln!(out)?;
    writeln!(out, "eta,nu,F,F_dense,truncation_quality,success_probability")?;
    let nmax = default_n_max(sc.n);
    let rows: Vec<_> = grid_points(&etas, &nus)
        .into_par_iter()
        .map(|(e, v)| {
            (
                e,
                v,
                f.eval(1.0 - e, v).re,
                dense_fidelity(&spec, e, v, nmax),
                truncation_quality(&f, 1.0 - e, v),
                success_probability(&spec, e, v),
            )
        })
        .collect();
    for (e, v, s, d, q, p) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt15(e),
            fmt15(v),
            fmt15(s),
            fmt15(d),
            fmt15(q),
            fmt15(p)
        )?;
    }
    if let Some(p) = a.out {
        write_table(&p, "fidelity", sc.n, &f)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Decomposition {
    modes: usize,
    elements: Vec<OpticalElement>,
    reconstruction_error: f64,
}

fn cmd_decompose(a: DecomposeArgs, out: &mut dyn Write) -> Result<()> {
    let itf = match (a.n, a.matrix) {
        (Some(n), None) => builtin_detector(n)?,
        (None, Some(p)) => Interferometer::from_json_file(&p)?,
        _ => return Err(Error::Invalid("give exactly one of --n or --matrix".into())),
    };
    let ops = decompose_reck(&itf);
    let r = reconstruct(itf.modes(), &ops);
    let err = (r - itf.matrix()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let d = Decomposition {
        modes: itf.modes(),
        elements: ops,
        reconstruction_error: err,
    };
    let s = serde_json::to_string_pretty(&d)?;
    writeln!(out, "{s}")?;
    if let Some(p) = a.out {
        std::fs::write(p, s + "\n")?;
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> Result<()> {
    if a.steps < 2 {
        return Err(Error::Invalid("--steps must be at least 2".into()));
    }
    let etas: Vec<f64> = (0..a.steps)
        .map(|i| 0.5 + 0.5 * i as f64 / (a.steps - 1) as f64)
        .collect();
    let nus = a.nu.unwrap_or_else(|| vec![0.0, 1e-4, 0.05, 0.1]);
    check_grid(&etas, &nus)?;
    let pts = grid_points(&etas, &nus);
    let (header, rows): (&str, Vec<(f64, f64, f64, f64)>) = match (a.n, a.scenario) {
        (Some(n), None) => {
            let order = a.order.unwrap_or_default();
            let bell = BellSpec::builtin(n, 0)?;
            let c = confidence_expansion(&bell, order)?;
            let nmax = default_n_max(n);
            let rows = pts
                .into_par_iter()
                .map(|(e, v)| (e, v, c.eval(1.0 - e, v).re, dense_confidence(&bell, e, v, nmax)))
                .collect();
            ("eta,nu,C,C_dense", rows)
        }
        (None, Some(path)) => {
            let sc = Scenario::from_path(&path)?;
            let order = a.order.unwrap_or_else(|| sc.order());
            let spec = sc.build(order)?;
            let f = fidelity_expansion(&spec, order)?;
            let nmax = default_n_max(sc.n);
            let rows = pts
                .into_par_iter()
                .map(|(e, v)| (e, v, f.eval(1.0 - e, v).re, dense_fidelity(&spec, e, v, nmax)))
                .collect();
            ("eta,nu,F,F_dense", rows)
        }
        _ => return Err(Error::Invalid("give exactly one of --n or --scenario".into())),
    };
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for (e, v, s, d) in rows {
        text.push_str(&format!("{},{},{},{}\n", fmt15(e), fmt15(v), fmt15(s), fmt15(d)));
    }
    out.write_all(text.as_bytes())?;
    if let Some(p) = a.out {
        std::fs::write(p, text)?;
    }
    Ok(())
}

/// One named check of `verify`.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn table_check(name: &str, got: &BivariatePoly, want: &[f64; 9], tol: f64) -> Check {
    let got: Vec<f64> = deficit_coefficients(got).into_iter().map(|(_, v)| v).collect();
    let worst = got
        .iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs())
        .fold(0.0, f64::max);
    Check {
        name: name.into(),
        passed: worst <= tol,
        detail: format!("max |Δ| = {worst:.3e}"),
    }
}

/// Order: (0,1),(1,0),(1,1),(2,0),(2,1),(3,0),(3,1),(4,0),(4,1).
pub mod reference {
    pub const CONFIDENCE_1: [f64; 9] = [1.0, 3.0, -4.0, -3.0, 5.0, 1.0, -2.0, 0.0, 0.0];
    pub const CONFIDENCE_2: [f64; 9] = [
        7.0 / 3.0,
        28.0 / 9.0,
        -304.0 / 27.0,
        -1075.0 / 324.0,
        15803.0 / 972.0,
        1883.0 / 1458.0,
        -23147.0 / 2916.0,
        -2029.0 / 26244.0,
        -19991.0 / 39366.0,
    ];
    pub const SCISSORS_1: [f64; 9] = [
        1.0 / 8.0,
        9.0 / 16.0,
        1.0 / 8.0,
        -27.0 / 64.0,
        7.0 / 128.0,
        81.0 / 256.0,
        41.0 / 256.0,
        -243.0 / 1024.0,
        85.0 / 2048.0,
    ];
    pub const SCISSORS_2: [f64; 9] = [
        7.0 / 17.0,
        483.0 / 1156.0,
        -4826.0 / 4913.0,
        1431.0 / 4624.0,
        48021.0 / 78608.0,
        -235683.0 / 314432.0,
        1276203.0 / 2672672.0,
        1443321.0 / 2515456.0,
        -36559049.0 / 21381376.0,
    ];
    pub const GB_1: [f64; 9] = [
        32.0,
        1.0 / 8.0,
        24.0,
        -1.0 / 256.0,
        197.0 / 8.0,
        0.0,
        1575.0 / 64.0,
        0.0,
        1575.0 / 64.0,
    ];
    pub const GB_2: [f64; 9] = [
        56.0,
        7.0 / 64.0,
        175.0 / 4.0,
        -49.0 / 12286.0,
        17143.0 / 384.0,
        343.0 / 7077888.0,
        19736731.0 / 442368.0,
        0.0,
        842106125.0 / 18874368.0,
    ];
    pub const MSV_1: [f64; 9] = [
        0.0,
        1.0 / 8.0,
        0.0,
        -1.0 / 256.0,
        -1.0 / 8.0,
        0.0,
        -7.0 / 64.0,
        0.0,
        -225.0 / 2048.0,
    ];
    pub const MSV_2: [f64; 9] = [
        0.0,
        35.0 / 192.0,
        0.0,
        -391.0 / 36864.0,
        -1351.0 / 4608.0,
        -77.0 / 786432.0,
        -107425.0 / 442368.0,
        8473.0 / 226492416.0,
        -4611707.0 / 18874368.0,
    ];
}

fn run_checks() -> Result<Vec<Check>> {
    use reference::*;
    let o = ExpansionOrder::default();
    let mut v = Vec::new();
    let alpha = Complex64::new(3f64.sqrt(), 0.0);
    let lv = |n| default_levels(n, o);

    v.push(table_check("confidence table N=1", &confidence_expansion(&BellSpec::builtin(1, 0)?, o)?, &CONFIDENCE_1, 1e-9));
    v.push(table_check("confidence table N=2", &confidence_expansion(&BellSpec::builtin(2, 0)?, o)?, &CONFIDENCE_2, 1e-9));
    for (n, want) in [(1, &SCISSORS_1), (2, &SCISSORS_2)] {
        let f = fidelity_expansion(&scissors(n, alpha, lv(n))?, o)?;
        v.push(table_check(&format!("scissors table N={n}"), &f, want, 1e-9));
    }
    for (n, want) in [(1, &GB_1), (2, &GB_2)] {
        let f = fidelity_expansion(&generalized_bell_prep(n, 0.25, 0.25, lv(n))?, o)?;
        v.push(table_check(&format!("generalized Bell table N={n}"), &f, want, 1e-9));
    }
    for (n, want) in [(1, &MSV_1), (2, &MSV_2)] {
        let f = fidelity_expansion(&msv_prep(n, 0.25, lv(n))?, o)?;
        v.push(table_check(&format!("truncated MSV table N={n}"), &f, want, 1e-9));
    }
    for (n, p) in [(1, 1.0), (2, 0.5)] {
        let got = ideal_success_probability(&BellSpec::builtin(n, 0)?);
        v.push(Check {
            name: format!("ideal success p({n})"),
            passed: (got - p).abs() <= 1e-12,
            detail: format!("{got}"),
        });
    }
    for n in 1..=2 {
        for a in [1.0, 3f64.sqrt(), 3.0] {
            let al = Complex64::new(a, 0.0);
            let sc = fidelity_expansion(&scissors(n, al, lv(n))?, o)?;
            let rv = fidelity_expansion(&reversal(n, al, lv(n))?, o)?;
            let d = sc.max_abs_diff(&rv);
            v.push(Check {
                name: format!("scissors = reversal N={n} |α|={a:.4}"),
                passed: d <= 1e-10,
                detail: format!("max |Δ| = {d:.3e}"),
            });
        }
    }
    for n in 1..=2 {
        let itf = builtin_detector(n)?;
        let worst = (0..=6)
            .map(|s| compute_b_coefficients(&itf, s).max_abs_diff(&b_coefficients_tuple_sum(&itf, s)))
            .fold(0.0, f64::max);
        v.push(Check {
            name: format!("B coefficient paths N={n}"),
            passed: worst <= 1e-10,
            detail: format!("max |Δ| = {worst:.3e}"),
        });
    }
    for n in 1..=2 {
        let bell = BellSpec::builtin(n, 0)?;
        let g = dense_gamma(&bell, 0.8, 0.05, default_n_max(n));
        let (h, e, x) = (g.hermiticity_defect(), g.min_eigenvalue(), g.cross_sector_max());
        v.push(Check {
            name: format!("POM Hermitian, PSD, sector-diagonal N={n}"),
            passed: h <= 1e-10 && e >= -1e-10 && x == 0.0,
            detail: format!("herm {h:.1e}, min eig {e:.1e}, cross {x:.1e}"),
        });
    }
    {
        let mut u = builtin_detector(2)?.matrix().clone();
        u[(0, 0)] += Complex64::new(1e-3, 0.0);
        let (q, _) = u.clone().qr().unpack();
        // re-unitarize so only selectivity can fail
        let itf = Interferometer::new(q)?;
        let d = bell_amplitudes(2, 0, 1.0)?.d;
        let rejected = matches!(BellSpec::new(itf, d, 0.0), Err(Error::NotSelective(_)));
        v.push(Check {
            name: "selectivity rejects a perturbed detector".into(),
            passed: rejected,
            detail: String::new(),
        });
    }
    for n in 1..=2 {
        let bell = BellSpec::builtin(n, 0)?;
        let a = confidence_expansion(&bell, o)?;
        let b = confidence_expansion(&bell, ExpansionOrder::new(5, 1))?.reorder(o);
        let d = a.max_abs_diff(&b);
        v.push(Check {
            name: format!("order (4,1) vs (5,1) stable N={n}"),
            passed: d <= 1e-12,
            detail: format!("max |Δ| = {d:.3e}"),
        });
    }
    {
        let spec = scissors(1, alpha, default_n_max(1))?;
        let f = fidelity_expansion(&spec, o)?;
        let dense = dense_fidelity(&spec, 0.9, 0.0, default_n_max(1));
        let d = (f.eval(0.1, 0.0).re - dense).abs();
        v.push(Check {
            name: "series vs dense fidelity at η=0.9".into(),
            passed: d <= 5e-4,
            detail: format!("|Δ| = {d:.3e}"),
        });
    }
    Ok(v)
}

fn cmd_verify(out: &mut dyn Write) -> Result<bool> {
    let checks = run_checks()?;
    let mut ok = true;
    for c in &checks {
        ok &= c.passed;
        writeln!(out, "{} {}  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(out, "{} checks, {} failed", checks.len(), failed)?;
    Ok(ok)
}

fn init_threads() {
    if let Some(n) = std::env::var("BELLSIM_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // a second call in the same process finds the pool already built
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs the CLI with explicit streams; returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    init_threads();
    let res = match cli.cmd {
        Command::Confidence(a) => cmd_confidence(a, out).map(|_| true),
        Command::Fidelity(a) => cmd_fidelity(a, out).map(|_| true),
        Command::Verify => cmd_verify(out),
        Command::Decompose(a) => cmd_decompose(a, out).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a, out).map(|_| true),
    };
    match res {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY_FAILED,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_BAD_INPUT
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt15(3.0), "3");
        assert_eq!(fmt15(7.0 / 3.0), "2.33333333333333");
        assert_eq!(fmt15(-0.0), "0");
        assert_eq!(fmt15(0.5625), "0.5625");
        assert_eq!(fmt15(1e-7), "1.00000000000000e-7");
    }

    #[test]
    fn order_flag() {
        assert_eq!(parse_order("4,1").unwrap(), ExpansionOrder::new(4, 1));
        assert!(parse_order("4").is_err());
    }

    #[test]
    fn scenario_fields() {
        let s: Scenario = serde_json::from_str(r#"{"manipulation":"scissors","n":1,"alpha":[1.0,0.5]}"#).unwrap();
        assert_eq!(s.alpha.unwrap().value(), Complex64::new(1.0, 0.5));
        assert!(serde_json::from_str::<Scenario>(r#"{"manipulation":"scissors","n":1,"bogus":1}"#).is_err());
        let s: Scenario = serde_json::from_str(r#"{"manipulation":"msv_prep","n":1}"#).unwrap();
        assert!(s.build(ExpansionOrder::default()).is_err());
    }
}
