//! Excitation-number moments, the Mandel parameter, the second-order
//! correlation function and large-`n` probability asymptotics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gseq::{log_asymptotic_leading_term, AsymptoticFamily, GSequence};
use crate::specfun::compensated_sum;
use crate::states::{distribution_u, log_terms, ExcitationDistribution, StateSpec, Truncation};

/// Relative tolerance for Poissonian classification and ratio boundaries.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SubPoissonian,
    Poissonian,
    SuperPoissonian,
}

impl Regime {
    pub fn classify(q: f64) -> Self {
        if q.abs() <= BOUNDARY_TOL {
            Self::Poissonian
        } else if q < 0.0 {
            Self::SubPoissonian
        } else {
            Self::SuperPoissonian
        }
    }
}

/// Mandel parameter with the moments it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub q: f64,
    pub mean_n: f64,
    pub var_n: f64,
    pub regime: Regime,
    /// Independent evaluation from the three-series closed form (`k ≥ 2`).
    pub q_series: Option<f64>,
}

/// `(Σ n p(n), Σ n² p(n))`.
pub fn number_moments(dist: &ExcitationDistribution) -> (f64, f64) {
    let terms = || dist.probs.iter().enumerate().map(|(n, p)| (n as f64, *p));
    let mean = compensated_sum(terms().map(|(x, p)| x * p));
    let second = compensated_sum(terms().map(|(x, p)| x * x * p));
    (mean, second)
}

// (mean, variance), the variance taken about the mean in a second pass.
fn central_moments(dist: &ExcitationDistribution) -> (f64, f64) {
    let terms = || dist.probs.iter().enumerate().map(|(n, p)| (n as f64, *p));
    let total = compensated_sum(dist.probs.iter().copied());
    let mean = compensated_sum(terms().map(|(x, p)| x * p)) / total;
    let var = compensated_sum(terms().map(|(x, p)| (x - mean) * (x - mean) * p)) / total;
    (mean, var)
}

fn nonzero_u(spec: &StateSpec) -> Result<f64> {
    let u = spec.u();
    if u == 0.0 {
        return Err(Error::UndefinedAtOrigin);
    }
    if spec.k() == Truncation::Finite(0) {
        return Err(Error::Domain("truncation k = 0 has a single level; the statistics are undefined".into()));
    }
    Ok(u)
}

/// Mandel parameter `Q = Var N/⟨N⟩ − 1` from the excitation distribution.
pub fn mandel_q(spec: &StateSpec) -> Result<QReport> {
    let u = nonzero_u(spec)?;
    let dist = distribution_u(spec.seq(), spec.k(), u)?;
    let (mean, var) = central_moments(&dist);
    let q = var / mean - 1.0;
    let q_series = match spec.k() {
        Truncation::Finite(k) if k < 2 => None,
        k => Some(q_series_u(spec.seq(), k, u)?),
    };
    Ok(QReport {
        q,
        mean_n: mean,
        var_n: var,
        regime: Regime::classify(q),
        q_series,
    })
}

fn check_u(u: f64) -> Result<()> {
    if u == 0.0 {
        return Err(Error::UndefinedAtOrigin);
    }
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("u must be finite and positive, got {u}")));
    }
    Ok(())
}

/// `Q₁(u) = −g(0)u/(g(1) + g(0)u)`.
pub fn q_k1(seq: &GSequence, u: f64) -> Result<f64> {
    check_u(u)?;
    let (g0, g1) = (seq.g(0)?, seq.g(1)?);
    Ok(-g0 * u / (g1 + g0 * u))
}

/// `Q₂(u) = u[2g₁/(g₂ + 2g₁u) − g₀(g₂ + 2g₁u)/(g₁g₂ + g₀g₂u + g₀g₁u²)]`.
pub fn q_k2(seq: &GSequence, u: f64) -> Result<f64> {
    check_u(u)?;
    let (g0, g1, g2) = (seq.g(0)?, seq.g(1)?, seq.g(2)?);
    let b = g2 + 2.0 * g1 * u;
    Ok(u * (2.0 * g1 / b - g0 * b / (g1 * g2 + g0 * g2 * u + g0 * g1 * u * u)))
}

/// Three-series closed form `Q = u(A/B − B/C)` with
/// `A = Σ (n+1)(n+2)uⁿ/g(n+2)`, `B = Σ (n+1)uⁿ/g(n+1)`, `C = Σ uⁿ/g(n)`.
pub fn q_series(seq: &GSequence, k: Truncation, u: f64) -> Result<f64> {
    check_u(u)?;
    q_series_u(seq, k, u)
}

// A, B, C from the terms ln(uⁿ/g(n)), all multiplied by the same factor
// exp(−max ln term) so that only ratios are meaningful.
fn scaled_abc(logs: &[f64], u: f64) -> (f64, f64, f64) {
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t: Vec<f64> = logs.iter().map(|l| (l - shift).exp()).collect();
    // (n+1)uⁿ/g(n+1) = (m/u)·u^m/g(m) with m = n + 1.
    let b = compensated_sum(t.iter().enumerate().skip(1).map(|(m, v)| m as f64 * v)) / u;
    let a = compensated_sum(t.iter().enumerate().skip(2).map(|(m, v)| (m * (m - 1)) as f64 * v)) / (u * u);
    (a, b, compensated_sum(t.iter().copied()))
}

fn q_series_u(seq: &GSequence, k: Truncation, u: f64) -> Result<f64> {
    let logs = log_terms(seq, k, u)?;
    let (a, b, c) = scaled_abc(&logs, u);
    Ok(u * (a / b - b / c))
}

/// Second-order correlation `g² = Σ n(n−1)p(n)/(Σ n p(n))²`.
pub fn correlation_g2(spec: &StateSpec) -> Result<f64> {
    let u = nonzero_u(spec)?;
    if spec.k() == Truncation::Finite(1) {
        return Ok(0.0);
    }
    let dist = distribution_u(spec.seq(), spec.k(), u)?;
    let (mean, var) = central_moments(&dist);
    // Σ n(n−1)p/⟨n⟩² = 1 + Q/⟨n⟩
    Ok(1.0 + (var / mean - 1.0) / mean)
}

/// Closed form `g² = A·C/B²` of the correlation function.
pub fn correlation_g2_series(seq: &GSequence, k: Truncation, u: f64) -> Result<f64> {
    check_u(u)?;
    if k == Truncation::Finite(1) {
        return Ok(0.0);
    }
    let logs = log_terms(seq, k, u)?;
    let (a, b, c) = scaled_abc(&logs, u);
    Ok(a * c / (b * b))
}

/// Sign of `Q` for small nonzero labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QSign {
    Positive,
    Negative,
    DependsOnHigherOrder,
}

fn compare(ratio: f64, boundary: f64) -> std::cmp::Ordering {
    if (ratio - boundary).abs() <= BOUNDARY_TOL * boundary {
        std::cmp::Ordering::Equal
    } else {
        ratio.partial_cmp(&boundary).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// `g(0)g(2)/g(1)²`, the ratio governing the small-label sign of `Q`.
pub fn small_label_ratio(seq: &GSequence) -> Result<f64> {
    let (l0, l1, l2) = (seq.log_g(0)?, seq.log_g(1)?, seq.log_g(2)?);
    Ok((l0 + l2 - 2.0 * l1).exp())
}

/// Small-label sign of `Q`: positive below the ratio 2, negative above; on
/// the boundary the next ratio `g(0)g(3)/(g(1)g(2))` is compared with 3.
pub fn q_small_label_sign(seq: &GSequence, k: Truncation) -> Result<QSign> {
    use std::cmp::Ordering::*;
    if let Truncation::Finite(k) = k {
        if k < 2 {
            return Err(Error::Domain(format!("small-label sign needs k >= 2, got {k}")));
        }
    }
    match compare(small_label_ratio(seq)?, 2.0) {
        Less => return Ok(QSign::Positive),
        Greater => return Ok(QSign::Negative),
        Equal => {}
    }
    if k == Truncation::Finite(2) {
        return Ok(QSign::Negative);
    }
    let r2 = (seq.log_g(0)? + seq.log_g(3)? - seq.log_g(1)? - seq.log_g(2)?).exp();
    Ok(match compare(r2, 3.0) {
        Less => QSign::Positive,
        Greater => QSign::Negative,
        Equal if k == Truncation::Finite(3) => QSign::Negative,
        Equal => QSign::DependsOnHigherOrder,
    })
}

/// Label modulus `ζ₀` at which `Q₂` changes sign, when `g(0)g(2)/g(1)² < 2`.
pub fn q2_zero_crossing(seq: &GSequence) -> Result<Option<f64>> {
    let r = small_label_ratio(seq)?;
    if compare(r, 2.0) != std::cmp::Ordering::Less {
        return Ok(None);
    }
    let (g1, g2) = (seq.g(1)?, seq.g(2)?);
    let inner = (4.0 / r - 1.0).sqrt() - 1.0;
    Ok(Some((g2 / (2.0 * g1) * inner).sqrt()))
}

/// Two-term large-label approximation `Q ≈ −1 + g(k)/(k g(k−1)) |z|⁻²`.
pub fn q_large_label_approx(seq: &GSequence, k: usize, z: Complex64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("large-label approximation needs k >= 2, got {k}")));
    }
    let u = z.norm_sqr();
    if !(u >= 1.0) || !u.is_finite() {
        return Err(Error::Domain(format!("large-label approximation needs |z| >= 1, got {}", z.norm())));
    }
    let ratio = (seq.log_g(k)? - seq.log_g(k - 1)?).exp() / k as f64;
    Ok(-1.0 + ratio / u)
}

/// Family selector for [`p_asymptotic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum AsymptoticKind {
    ML { alpha: f64, beta: f64 },
    Wright { lambda: f64, mu: f64 },
    General { family: AsymptoticFamily },
    G1 { nu: f64, rho: f64, w: f64 },
}

/// Large-`n` approximation of `p(n) = uⁿ/(norm · g(n))`, where `norm` is the
/// normalization of the family (full or truncated) at `u`.
pub fn p_asymptotic(kind: &AsymptoticKind, n: usize, u: f64, norm: f64) -> Result<f64> {
    if n < 10 {
        return Err(Error::Domain(format!("asymptotic form needs n >= 10, got {n}")));
    }
    if !(u > 0.0) || !u.is_finite() || !(norm > 0.0) {
        return Err(Error::Domain(format!("need u > 0 and norm > 0, got u={u}, norm={norm}")));
    }
    let x = n as f64;
    let ln_u = u.ln();
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let log_p = match kind {
        AsymptoticKind::ML { alpha, beta } => {
            GSequence::ml_gamma(*alpha, *beta)?;
            let an = alpha * x;
            x * ln_u + an - (an + beta - 0.5) * an.ln() - half_ln_2pi
        }
        AsymptoticKind::Wright { lambda, mu } => {
            GSequence::wright_product(*lambda, *mu)?;
            x * ln_u + (lambda + 1.0) * x + (0.5 - lambda * x - mu) * lambda.ln()
                - ((lambda + 1.0) * x + mu) * x.ln()
                - (2.0 * PI).ln()
        }
        AsymptoticKind::General { family } => x * ln_u + log_asymptotic_leading_term(family, n)?,
        AsymptoticKind::G1 { nu, rho, w } => {
            GSequence::g1(*nu, *rho, *w)?;
            // norm = ρ w^{(ν+1)/ρ} E_{1/ρ,(ν+1)/ρ}(w^{1/ρ}u); only the
            // Mittag-Leffler factor enters the denominator.
            let a = (x + nu + 1.0) / rho;
            let e = x / rho;
            a * w.ln() + x * ln_u + e - (a - 0.5) * e.ln() - half_ln_2pi + rho.ln()
                + (nu + 1.0) / rho * w.ln()
        }
    };
    Ok((log_p - norm.ln()).exp())
}

/// `ln Γ`-based exact probability, exposed for comparisons with
/// [`p_asymptotic`].
pub fn p_exact(seq: &GSequence, k: Truncation, n: usize, u: f64) -> Result<f64> {
    let d = distribution_u(seq, k, u)?;
    if let Some(p) = d.probs.get(n) {
        return Ok(*p);
    }
    // Beyond the adaptive cutoff of an untruncated series.
    Ok((n as f64 * u.ln() - seq.log_g(n)? - d.log_norm).exp())
}
