//! Resolution-of-identity weights and their moment conditions.
//!
//! Completeness of a family with sequence `g` and normalization series `T`
//! holds when `π∫₀^∞ U(u)/T(u) uⁿ du = g(n)` for every `n`. For the
//! Mittag-Leffler, Wright and general families `T` cancels analytically and
//! the integrals are evaluated on the cancelled integrands.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gseq::{AuxFunction, GSequence};
use crate::specfun::{log_kratzel_kernel, lgamma, truncated_series, KratzelParams};
use crate::states::{log_normalization_u, Truncation};

pub use crate::quadrature::{quadrature_improper, QuadratureResult};

const MOMENT_TOL: f64 = 1e-12;

/// Density `U(u)` on `(0, ∞)` realizing a resolution of the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum WeightFunction {
    /// `π⁻¹ e^{−u} exp_k(−u)`; not positive for odd `k`.
    CanonicalTruncated { k: usize },
    /// `(πα)⁻¹ u^{β/α−1} exp(−u^{1/α}) T(u)` with `T` the (truncated)
    /// Mittag-Leffler series.
    ML { alpha: f64, beta: f64, k: Truncation },
    /// `π⁻¹ T(u) K(u)` with `K` the Krätzel kernel and `T` the (truncated)
    /// Wright series.
    Wright { lambda: f64, mu: f64, k: Truncation },
    /// `π⁻¹ T(u) f(u)` for an auxiliary function with `g(n) = f̂(n+1)`.
    General { f: AuxFunction, seq: GSequence, k: Truncation },
}

impl WeightFunction {
    /// The sequence whose moments the weight reproduces.
    pub fn seq(&self) -> GSequence {
        match self {
            Self::CanonicalTruncated { .. } => GSequence::Factorial,
            Self::ML { alpha, beta, .. } => GSequence::MLGamma { alpha: *alpha, beta: *beta },
            Self::Wright { lambda, mu, .. } => GSequence::WrightProduct { lambda: *lambda, mu: *mu },
            Self::General { seq, .. } => seq.clone(),
        }
    }

    pub fn truncation(&self) -> Truncation {
        match self {
            Self::CanonicalTruncated { k } => Truncation::Finite(*k),
            Self::ML { k, .. } | Self::Wright { k, .. } | Self::General { k, .. } => *k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.seq().validate()?;
        if let Self::Wright { lambda, mu, .. } = self {
            KratzelParams::new(*lambda, *mu)?;
        }
        if let Self::General { seq, k: Truncation::Finite(k), .. } = self {
            if seq.max_index().is_some_and(|m| *k > m) {
                return Err(Error::Domain(format!("truncation {k} exceeds the table length")));
            }
        }
        Ok(())
    }

    /// Short label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Self::CanonicalTruncated { .. } => "canonical_truncated",
            Self::ML { .. } => "ml",
            Self::Wright { .. } => "wright",
            Self::General { .. } => "general",
        }
    }

    /// Parameter summary used in reports.
    pub fn params(&self) -> String {
        match self {
            Self::CanonicalTruncated { k } => format!("k={k}"),
            Self::ML { alpha, beta, k } => format!("alpha={alpha};beta={beta};k={k}"),
            Self::Wright { lambda, mu, k } => format!("lambda={lambda};mu={mu};k={k}"),
            Self::General { f, k, .. } => {
                let terms: Vec<String> = f
                    .terms()
                    .iter()
                    .map(|t| format!("c={},nu={},w={},rho={},l={}", t.c, t.nu, t.w, t.rho, t.l))
                    .collect();
                format!("f=[{}];k={k}", terms.join("|"))
            }
        }
    }
}

fn check_u(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("weight argument must be positive, got {u}")))
    }
}

// ln U(u) − ln T(u): the family-specific factor once the series cancels.
fn log_cancelled(w: &WeightFunction, u: f64) -> Result<f64> {
    let lu = u.ln();
    Ok(match w {
        WeightFunction::ML { alpha, beta, .. } => {
            (beta / alpha - 1.0) * lu - u.powf(1.0 / alpha) - (PI * alpha).ln()
        }
        WeightFunction::Wright { lambda, mu, .. } => {
            log_kratzel_kernel(&KratzelParams::new(*lambda, *mu)?, u)? - PI.ln()
        }
        WeightFunction::General { f, .. } => f.eval(u).ln() - PI.ln(),
        WeightFunction::CanonicalTruncated { .. } => unreachable!("no cancellation for the canonical kind"),
    })
}

/// `U(u)`.
pub fn weight_eval(w: &WeightFunction, u: f64) -> Result<f64> {
    check_u(u)?;
    w.validate()?;
    match w {
        WeightFunction::CanonicalTruncated { k } => {
            let ek = truncated_series(&GSequence::Factorial, *k, Complex64::new(-u, 0.0))?.re;
            Ok((-u).exp() * ek / PI)
        }
        WeightFunction::General { f, .. } if f.eval(u) <= 0.0 => {
            let lt = log_normalization_u(&w.seq(), w.truncation(), u)?;
            Ok(f.eval(u) * lt.exp() / PI)
        }
        _ => {
            let lt = log_normalization_u(&w.seq(), w.truncation(), u)?;
            Ok((lt + log_cancelled(w, u)?).exp())
        }
    }
}

// Integrates exp(log_f(u)) over (0, ∞), surfacing the first error raised by
// the integrand.
fn integrate_log<F: Fn(f64) -> Result<f64>>(log_f: F, tol: f64) -> Result<QuadratureResult> {
    let failure = std::cell::RefCell::new(None);
    let r = quadrature_improper(
        |u| match log_f(u) {
            Ok(l) => l.exp(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    r
}

/// `π∫₀^∞ U(u)/T(u) uⁿ du`, on the cancelled integrand where one exists.
pub fn moment_value(w: &WeightFunction, n: usize) -> Result<f64> {
    w.validate()?;
    let nf = n as f64;
    let r = match w {
        WeightFunction::CanonicalTruncated { k } => {
            let k = *k;
            quadrature_improper(
                |u| {
                    let f = &GSequence::Factorial;
                    let num = truncated_series(f, k, Complex64::new(-u, 0.0)).map(|c| c.re);
                    let den = truncated_series(f, k, Complex64::new(u, 0.0)).map(|c| c.re);
                    match (num, den) {
                        (Ok(a), Ok(b)) => (nf * u.ln() - u).exp() * a / b,
                        _ => 0.0,
                    }
                },
                MOMENT_TOL,
            )?
        }
        WeightFunction::ML { alpha, beta, .. } => {
            let (a, b) = (*alpha, *beta);
            quadrature_improper(
                |u| ((b / a - 1.0 + nf) * u.ln() - u.powf(1.0 / a)).exp() / a,
                MOMENT_TOL,
            )?
        }
        WeightFunction::General { f, .. } => {
            quadrature_improper(|u| f.eval(u) * (nf * u.ln()).exp(), MOMENT_TOL)?
        }
        WeightFunction::Wright { lambda, mu, .. } => {
            let p = KratzelParams::new(*lambda, *mu)?;
            integrate_log(|u| Ok(log_kratzel_kernel(&p, u)? + nf * u.ln()), 1e-10)?
        }
    };
    Ok(r.value)
}

/// One row of a moment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub kind: String,
    pub params: String,
    pub n: usize,
    pub target: f64,
    pub value: f64,
    pub residual: f64,
}

/// Residuals `|π∫U/T uⁿ du − g(n)|/g(n)`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
    /// False for the canonical truncated kind, whose identity is reported
    /// as data rather than asserted.
    pub asserted: bool,
}

impl MomentReport {
    /// Writes `kind,params,n,target,value,residual` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn moment_check(w: &WeightFunction, n_max: usize, tol: f64) -> Result<MomentReport> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    w.validate()?;
    if let WeightFunction::CanonicalTruncated { k } = w {
        if n_max > *k {
            return Err(Error::Domain(format!("n_max = {n_max} exceeds the truncation {k}")));
        }
    }
    let seq = w.seq();
    if let Some(m) = seq.max_index() {
        if n_max > m {
            return Err(Error::Domain(format!("n_max = {n_max} exceeds the table length")));
        }
    }
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let lg = seq.log_g(n)?;
        let value = moment_value(w, n)?;
        let residual = if value > 0.0 {
            ((value.ln() - lg).exp() - 1.0).abs()
        } else {
            (value * (-lg).exp() - 1.0).abs()
        };
        rows.push(MomentRow {
            kind: w.label().into(),
            params: w.params(),
            n,
            target: lg.exp(),
            value,
            residual,
        });
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(MomentReport {
        pass: max_residual <= tol,
        rows,
        max_residual,
        tol,
        asserted: !matches!(w, WeightFunction::CanonicalTruncated { .. }),
    })
}

/// `Γ(s)Γ(λs + μ − λ)`, the Mellin transform of the Krätzel kernel.
pub fn kratzel_mellin_target(p: &KratzelParams, s: f64) -> f64 {
    (lgamma(s) + lgamma(p.lambda() * s + p.mu() - p.lambda())).exp()
}

/// `∫₀^∞ K(u) u^{s−1} du` by quadrature.
pub fn kratzel_mellin_moment(p: &KratzelParams, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("Mellin argument must be positive, got {s}")));
    }
    Ok(integrate_log(|u| Ok(log_kratzel_kernel(p, u)? + (s - 1.0) * u.ln()), 1e-10)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::mittag_leffler;

    fn ml(alpha: f64, beta: f64, k: Truncation) -> WeightFunction {
        WeightFunction::ML { alpha, beta, k }
    }

    #[test]
    fn weight_examples() {
        let w = ml(1.0, 1.0, Truncation::Infinite);
        for u in [0.1, 1.0, 7.5] {
            assert!((weight_eval(&w, u).unwrap() * PI - 1.0).abs() < 1e-14);
        }
        let c = WeightFunction::CanonicalTruncated { k: 1 };
        let v = weight_eval(&c, 2.0).unwrap();
        assert!((v - (-2.0f64).exp() * (1.0 - 2.0) / PI).abs() < 1e-16);
        assert!(v < 0.0);

        // 𝔈₃,½,½(1) = Σ_{n≤3} 1/Γ(n/2 + 1/2); reference from a 30-digit sum.
        let w = ml(0.5, 0.5, Truncation::Finite(3));
        let got = weight_eval(&w, 1.0).unwrap();
        assert!((got / 0.864_797_112_968_516_324_87 - 1.0).abs() < 1e-14, "{got}");
    }

    #[test]
    fn weight_rejects_bad_input() {
        assert!(weight_eval(&ml(1.0, 1.0, Truncation::Infinite), 0.0).is_err());
        assert!(weight_eval(&ml(-1.0, 1.0, Truncation::Infinite), 1.0).is_err());
    }

    #[test]
    fn ml_moment_examples() {
        let r = moment_check(&ml(1.0, 1.0, Truncation::Infinite), 0, 1e-10).unwrap();
        assert!(r.pass && r.rows[0].residual < 1e-10);
        let r = moment_check(&ml(2.0, 1.0, Truncation::Finite(5)), 1, 1e-8).unwrap();
        assert!((r.rows[1].value - 2.0).abs() < 2e-8);
        assert!(r.pass);
    }

    #[test]
    fn wright_moment_example() {
        let w = WeightFunction::Wright { lambda: 1.0, mu: 1.0, k: Truncation::Finite(4) };
        let r = moment_check(&w, 2, 1e-6).unwrap();
        assert!((r.rows[2].value - 4.0).abs() < 4e-6, "{:?}", r.rows[2]);
        assert!(r.pass);
    }

    #[test]
    fn kratzel_mellin_examples() {
        let p = KratzelParams::new(1.0, 1.0).unwrap();
        assert!((kratzel_mellin_moment(&p, 1.0).unwrap() - 1.0).abs() < 1e-8);
        let p = KratzelParams::new(0.5, 0.5).unwrap();
        let want = PI.sqrt();
        assert!((kratzel_mellin_moment(&p, 1.0).unwrap() / want - 1.0).abs() < 1e-8);
        assert!((kratzel_mellin_target(&p, 1.0) / want - 1.0).abs() < 1e-14);
        assert!((kratzel_mellin_moment(&p, 2.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn general_weight_matches_ml_form() {
        // f = e^{−u} with the factorial sequence is the canonical family.
        let f = AuxFunction::single(0.0, 1.0, 1.0).unwrap();
        let w = WeightFunction::General { f, seq: GSequence::Factorial, k: Truncation::Infinite };
        assert!((weight_eval(&w, 3.0).unwrap() * PI - 1.0).abs() < 1e-13);
        let g1 = AuxFunction::single(1.0, 2.0, 1.0).unwrap();
        let seq = g1.as_g1().unwrap();
        let w = WeightFunction::General { f: g1, seq, k: Truncation::Infinite };
        let u: f64 = 1.7;
        let t = 2.0 * mittag_leffler(0.5, 1.0, u).unwrap();
        let want = t * u * (-u * u).exp() / PI;
        assert!((weight_eval(&w, u).unwrap() / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_moments_are_reported() {
        let r = moment_check(&WeightFunction::CanonicalTruncated { k: 2 }, 2, 1e-6).unwrap();
        assert!(!r.asserted);
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|row| row.value.is_finite()));
        assert!(moment_check(&WeightFunction::CanonicalTruncated { k: 2 }, 3, 1e-6).is_err());
    }

    #[test]
    fn csv_export() {
        let r = moment_check(&ml(1.0, 1.0, Truncation::Infinite), 1, 1e-8).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("kind,params,n,target,value,residual"));
        assert!(lines.next().unwrap().starts_with("ml,alpha=1;beta=1;k=inf,0,1.0,"));
    }
}
