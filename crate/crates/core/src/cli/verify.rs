use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{seq_label, RunConfig};
use super::CliError;
use crate::completeness::{kratzel_mellin_moment, kratzel_mellin_target, moment_check, WeightFunction};
use crate::gseq::{verify_mellin_link, AuxFunction, GSequence};
use crate::sampler::sample_state;
use crate::specfun::KratzelParams;
use crate::states::{overlap, StateSpec, Truncation};
use crate::statistics::{mandel_q, q_k1, q_k2};
use crate::zeros::{orthogonal_pair, polynomial_roots};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    /// Error message when the check could not be evaluated.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub checks: Vec<CheckRow>,
}

const SAMPLER_DRAWS: usize = 100_000;

fn suite_sequences() -> Vec<GSequence> {
    vec![
        GSequence::Factorial,
        GSequence::MLGamma { alpha: 0.5, beta: 0.5 },
        GSequence::WrightProduct { lambda: 1.0, mu: 1.0 },
        GSequence::G1 { nu: 0.5, rho: 2.0, w: 1.5 },
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 { 0.0 } else { (a - b).abs() / scale }
}

// A check computes (residual, default tolerance).
type Check = Box<dyn Fn(u64) -> crate::Result<(f64, f64)> + Send + Sync>;

fn checks() -> Vec<(String, Check)> {
    let mut out: Vec<(String, Check)> = Vec::new();
    for (alpha, beta) in [(1.0, 1.0), (0.5, 0.5), (2.0, 1.0), (0.1, 0.1)] {
        let w = WeightFunction::ML { alpha, beta, k: Truncation::Infinite };
        out.push((
            format!("moments/ml(alpha={alpha};beta={beta})"),
            Box::new(move |_| Ok((moment_check(&w, 6, 1e-8)?.max_residual, 1e-8))),
        ));
    }
    for (lambda, mu) in [(1.0, 1.0), (0.5, 0.5)] {
        let w = WeightFunction::Wright { lambda, mu, k: Truncation::Infinite };
        out.push((
            format!("moments/wright(lambda={lambda};mu={mu})"),
            Box::new(move |_| Ok((moment_check(&w, 4, 1e-6)?.max_residual, 1e-6))),
        ));
    }
    for (lambda, mu) in [(1.0, 1.0), (0.5, 0.5), (2.0, 1.0)] {
        out.push((
            format!("kratzel_mellin(lambda={lambda};mu={mu})"),
            Box::new(move |_| {
                let p = KratzelParams::new(lambda, mu)?;
                let mut worst: f64 = 0.0;
                for s in [1.0, 2.0, 3.0] {
                    worst = worst.max(rel(kratzel_mellin_moment(&p, s)?, kratzel_mellin_target(&p, s)));
                }
                Ok((worst, 1e-6))
            }),
        ));
    }
    for (nu, rho, w) in [(0.0, 1.0, 1.0), (0.5, 2.0, 1.5), (1.5, 0.5, 0.7)] {
        out.push((
            format!("mellin_link/g1(nu={nu};rho={rho};w={w})"),
            Box::new(move |_| {
                let f = AuxFunction::single(nu, rho, w)?;
                let seq = GSequence::g1(nu, rho, w)?;
                Ok((verify_mellin_link(&f, &seq, 6, 1e-8)?.max_residual, 1e-8))
            }),
        ));
    }
    for seq in suite_sequences() {
        let name = seq_label(&seq);
        let s = seq.clone();
        out.push((
            format!("roots/{name}"),
            Box::new(move |_| {
                let mut worst: f64 = 0.0;
                for k in 1..=20 {
                    worst = worst.max(polynomial_roots(&s, k)?.max_residual());
                }
                Ok((worst, 1e-9))
            }),
        ));
        let s = seq.clone();
        out.push((
            format!("orthogonality/{name}"),
            Box::new(move |_| {
                let z1 = Complex64::new(0.7, 0.3);
                let mut worst: f64 = 0.0;
                for k in 1..=20 {
                    for root in polynomial_roots(&s, k)?.roots {
                        let (a, b) = orthogonal_pair(&s, k, root, z1)?;
                        worst = worst.max(overlap(&a, &b)?.norm());
                    }
                }
                Ok((worst, 1e-9))
            }),
        ));
        let s = seq.clone();
        out.push((
            format!("q_cross/{name}"),
            Box::new(move |_| {
                let mut worst: f64 = 0.0;
                for k in 1..=6 {
                    for u in [0.3f64, 1.0, 4.0] {
                        let r = mandel_q(&StateSpec::real(s.clone(), k, u.sqrt())?)?;
                        let closed = match k {
                            1 => q_k1(&s, u)?,
                            2 => q_k2(&s, u)?,
                            _ => r.q_series.expect("present for k >= 2"),
                        };
                        worst = worst.max(rel(r.q, closed));
                    }
                }
                Ok((worst, 1e-10))
            }),
        ));
        let s = seq;
        out.push((
            format!("sampler/{name}"),
            Box::new(move |seed| {
                let spec = StateSpec::real(s.clone(), 10, 1.1)?;
                let q = mandel_q(&spec)?.q;
                let run = sample_state(&spec, SAMPLER_DRAWS, seed)?;
                let (Some(q_hat), Some(se)) = (run.q_hat, run.stderr_q) else {
                    return Ok((f64::INFINITY, 0.0));
                };
                Ok(((q_hat - q).abs(), 4.0 * se))
            }),
        ));
    }
    out
}

/// Runs every check; a configured `tol` replaces all default tolerances.
pub fn cmd_verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let tol_override = match cfg.tol {
        None => None,
        Some(_) => Some(cfg.tol(1.0)?),
    };
    let seed = cfg.seed.unwrap_or(0);
    let checks: Vec<CheckRow> = checks()
        .into_par_iter()
        .map(|(name, check)| {
            let (residual, default_tol, error) = match check(seed) {
                Ok((r, t)) => (r, t, None),
                Err(e) => (f64::INFINITY, 0.0, Some(e.to_string())),
            };
            let tol = tol_override.unwrap_or(default_tol);
            CheckRow { name, residual, tol, pass: error.is_none() && residual <= tol, error }
        })
        .collect();
    Ok(VerifyReport { pass: checks.iter().all(|c| c.pass), checks })
}
