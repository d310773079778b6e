use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::completeness::WeightFunction;
use crate::gseq::GSequence;
use crate::states::Truncation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Probs,
    Mandel,
    Corr,
    Verify,
    Zeros,
    Moments,
    Sample,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// `points` values from `min` to `max` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Grid {
    pub fn new(min: f64, max: f64, points: usize, scale: Scale) -> Self {
        Self { min, max, points, scale }
    }

    pub fn validate(&self, what: &str) -> Result<(), CliError> {
        if self.points == 0 {
            return Err(CliError::Config(format!("{what}: grid must have at least one point")));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(CliError::Config(format!(
                "{what}: need finite min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.scale == Scale::Log && !(self.min > 0.0) {
            return Err(CliError::Config(format!("{what}: log grid needs min > 0")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.points - 1 {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + t * (self.max - self.min),
                    Scale::Log => (self.min.ln() + t * (self.max / self.min).ln()).exp(),
                }
            })
            .map(|v| v.clamp(self.min, self.max))
            .collect()
    }
}

/// A sweep over one named parameter of the configured sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl ParamGrid {
    pub fn grid(&self) -> Grid {
        Grid::new(self.min, self.max, self.points, self.scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NRange {
    pub min: usize,
    pub max: usize,
}

/// Everything a command needs. Command-line flags override the matching
/// fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<GSequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Truncation>,
    /// Label modulus `|z|` axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_grid: Option<ParamGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_range: Option<NRange>,
    /// Label modulus for single-state commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config always serializes")
    }

    pub fn seq(&self) -> Result<GSequence, CliError> {
        let seq = self.seq.clone().ok_or_else(|| CliError::Config("missing `seq`".into()))?;
        seq.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(seq)
    }

    pub fn k(&self) -> Result<Truncation, CliError> {
        self.k.ok_or_else(|| CliError::Config("missing `k`".into()))
    }

    pub fn finite_k(&self) -> Result<usize, CliError> {
        self.k()?
            .finite()
            .ok_or_else(|| CliError::Config("this command needs a finite `k`".into()))
    }

    pub fn z_values(&self) -> Result<Vec<f64>, CliError> {
        let g = self.z_grid.as_ref().ok_or_else(|| CliError::Config("missing `z_grid`".into()))?;
        g.validate("z_grid")?;
        if g.min < 0.0 {
            return Err(CliError::Config("z_grid: label moduli must be nonnegative".into()));
        }
        Ok(g.values())
    }

    pub fn tol(&self, default: f64) -> Result<f64, CliError> {
        match self.tol {
            None => Ok(default),
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(CliError::Config(format!("tolerance must be positive, got {t}"))),
        }
    }

    /// `(parameter value, sequence)` pairs, or the configured sequence alone.
    pub fn param_sweep(&self) -> Result<Vec<(Option<f64>, GSequence)>, CliError> {
        let base = self.seq.clone().ok_or_else(|| CliError::Config("missing `seq`".into()))?;
        let Some(p) = &self.param_grid else {
            base.validate().map_err(|e| CliError::Config(e.to_string()))?;
            return Ok(vec![(None, base)]);
        };
        p.grid().validate("param_grid")?;
        p.grid()
            .values()
            .into_iter()
            .map(|v| Ok((Some(v), with_param(&base, &p.name, v)?)))
            .collect()
    }
}

/// The sequence with one parameter replaced.
pub fn with_param(seq: &GSequence, name: &str, v: f64) -> Result<GSequence, CliError> {
    let out = match (seq, name) {
        (GSequence::MLGamma { beta, .. }, "alpha") => GSequence::MLGamma { alpha: v, beta: *beta },
        (GSequence::MLGamma { alpha, .. }, "beta") => GSequence::MLGamma { alpha: *alpha, beta: v },
        (GSequence::WrightProduct { mu, .. }, "lambda") => GSequence::WrightProduct { lambda: v, mu: *mu },
        (GSequence::WrightProduct { lambda, .. }, "mu") => GSequence::WrightProduct { lambda: *lambda, mu: v },
        (GSequence::G1 { rho, w, .. }, "nu") => GSequence::G1 { nu: v, rho: *rho, w: *w },
        (GSequence::G1 { nu, w, .. }, "rho") => GSequence::G1 { nu: *nu, rho: v, w: *w },
        (GSequence::G1 { nu, rho, .. }, "w") => GSequence::G1 { nu: *nu, rho: *rho, w: v },
        _ => return Err(CliError::Config(format!("sequence {seq:?} has no parameter {name:?}"))),
    };
    out.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(out)
}

/// Short stable name of a sequence for report rows.
pub fn seq_label(seq: &GSequence) -> String {
    match seq {
        GSequence::Factorial => "factorial".into(),
        GSequence::MLGamma { alpha, beta } => format!("ml(alpha={alpha};beta={beta})"),
        GSequence::WrightProduct { lambda, mu } => format!("wright(lambda={lambda};mu={mu})"),
        GSequence::G1 { nu, rho, w } => format!("g1(nu={nu};rho={rho};w={w})"),
        GSequence::Table { values } => format!("table(len={})", values.len()),
    }
}
