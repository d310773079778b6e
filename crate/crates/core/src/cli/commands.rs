use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::CliError;
use crate::completeness::{moment_check, MomentReport};
use crate::gseq::GSequence;
use crate::sampler::{sample_state, SampleRun};
use crate::states::{excitation_distribution, StateSpec, Truncation};
use crate::statistics::{correlation_g2, mandel_q};
use crate::zeros::{polynomial_roots, vieta_check, RootSet, VietaReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbRow {
    pub abs_z: f64,
    pub n: usize,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MandelRow {
    pub param: Option<f64>,
    pub abs_z: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrRow {
    pub param: Option<f64>,
    pub abs_z: f64,
    pub g2: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZerosOutput {
    pub roots: RootSet,
    pub vieta: VietaReport,
}

/// `p(n)` over the `|z|` grid, rows ordered by `|z|` then `n`.
pub fn cmd_probs(cfg: &RunConfig) -> Result<Vec<ProbRow>, CliError> {
    let seq = cfg.seq()?;
    let k = cfg.k()?;
    let zs = cfg.z_values()?;
    let (n_min, n_max) = match (cfg.n_range, k) {
        (Some(r), _) if r.min > r.max => {
            return Err(CliError::Config(format!("n_range: min {} > max {}", r.min, r.max)))
        }
        (Some(r), _) => (r.min, r.max),
        (None, Truncation::Finite(k)) => (0, k),
        (None, Truncation::Infinite) => {
            return Err(CliError::Config("untruncated states need an explicit `n_range`".into()))
        }
    };
    let blocks: Vec<Vec<ProbRow>> = zs
        .par_iter()
        .map(|&z| {
            let spec = StateSpec::real(seq.clone(), k, z)?;
            let d = excitation_distribution(&spec)?;
            Ok((n_min..=n_max)
                .map(|n| ProbRow { abs_z: z, n, p: d.probs.get(n).copied().unwrap_or(0.0) })
                .collect())
        })
        .collect::<crate::Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

fn positive_z(cfg: &RunConfig, what: &str) -> Result<Vec<f64>, CliError> {
    let zs = cfg.z_values()?;
    if zs.iter().any(|z| *z <= 0.0) {
        return Err(CliError::Config(format!("{what} is undefined at z = 0; use a grid with min > 0")));
    }
    Ok(zs)
}

// Cells of the (parameter, |z|) grid in row-major order.
fn cells(cfg: &RunConfig, what: &str) -> Result<Vec<(Option<f64>, GSequence, f64)>, CliError> {
    let zs = positive_z(cfg, what)?;
    Ok(cfg
        .param_sweep()?
        .into_iter()
        .flat_map(|(p, seq)| zs.iter().map(move |&z| (p, seq.clone(), z)))
        .collect())
}

/// `Q` over the (parameter, `|z|`) grid.
pub fn cmd_mandel(cfg: &RunConfig) -> Result<Vec<MandelRow>, CliError> {
    let k = cfg.k()?;
    Ok(cells(cfg, "Q")?
        .into_par_iter()
        .map(|(param, seq, z)| {
            let q = mandel_q(&StateSpec::real(seq, k, z)?)?.q;
            Ok(MandelRow { param, abs_z: z, q })
        })
        .collect::<crate::Result<_>>()?)
}

/// `g²` and `Q` over the (parameter, `|z|`) grid.
pub fn cmd_corr(cfg: &RunConfig) -> Result<Vec<CorrRow>, CliError> {
    let k = cfg.k()?;
    Ok(cells(cfg, "g2")?
        .into_par_iter()
        .map(|(param, seq, z)| {
            let spec = StateSpec::real(seq, k, z)?;
            Ok(CorrRow { param, abs_z: z, g2: correlation_g2(&spec)?, q: mandel_q(&spec)?.q })
        })
        .collect::<crate::Result<_>>()?)
}

pub fn cmd_zeros(cfg: &RunConfig) -> Result<ZerosOutput, CliError> {
    let seq = cfg.seq()?;
    let k = cfg.finite_k()?;
    let roots = polynomial_roots(&seq, k)?;
    let vieta = vieta_check(&roots, &seq, k)?;
    Ok(ZerosOutput { roots, vieta })
}

pub fn cmd_moments(cfg: &RunConfig) -> Result<MomentReport, CliError> {
    let w = cfg.weight.clone().ok_or_else(|| CliError::Config("missing `weight`".into()))?;
    w.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let n_max = cfg.n_range.map_or(6, |r| r.max);
    Ok(moment_check(&w, n_max, cfg.tol(1e-8)?)?)
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<SampleRun, CliError> {
    let seq = cfg.seq()?;
    let k = cfg.k()?;
    let z = cfg.z.ok_or_else(|| CliError::Config("missing `z`".into()))?;
    let n = cfg.n_samples.ok_or_else(|| CliError::Config("missing `n_samples`".into()))?;
    if n == 0 {
        return Err(CliError::Config("n_samples must be at least 1".into()));
    }
    let spec = StateSpec::real(seq, k, z).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(sample_state(&spec, n, cfg.seed.unwrap_or(0))?)
}
