//! Generating sequences `g(n)`, auxiliary Mellin functions and their
//! asymptotic families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::quadrature_improper;
use crate::specfun::{factorial, gamma, lgamma, ln_factorial};

/// Positive arithmetic function generating a coherent-state family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum GSequence {
    /// `g(n) = n!`
    Factorial,
    /// `g(n) = Γ(αn + β)`
    MLGamma { alpha: f64, beta: f64 },
    /// `g(n) = n! Γ(λn + μ)`
    WrightProduct { lambda: f64, mu: f64 },
    /// `g(n) = ρ⁻¹ w^{−(n+ν+1)/ρ} Γ((n+ν+1)/ρ)`, the Mellin transform of
    /// `u^ν exp(−w u^ρ)` at `s = n + 1`.
    G1 { nu: f64, rho: f64, w: f64 },
    /// Explicit values `g(0), g(1), ...`.
    Table { values: Vec<f64> },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be a finite positive real, got {v}")))
    }
}

impl GSequence {
    pub fn ml_gamma(alpha: f64, beta: f64) -> Result<Self> {
        let s = Self::MLGamma { alpha, beta };
        s.validate()?;
        Ok(s)
    }

    pub fn wright_product(lambda: f64, mu: f64) -> Result<Self> {
        let s = Self::WrightProduct { lambda, mu };
        s.validate()?;
        Ok(s)
    }

    pub fn g1(nu: f64, rho: f64, w: f64) -> Result<Self> {
        let s = Self::G1 { nu, rho, w };
        s.validate()?;
        Ok(s)
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        let s = Self::Table { values };
        s.validate()?;
        Ok(s)
    }

    /// Checks parameter domains; needed after deserialization.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Factorial => Ok(()),
            Self::MLGamma { alpha, beta } => {
                positive("alpha", *alpha)?;
                positive("beta", *beta)
            }
            Self::WrightProduct { lambda, mu } => {
                positive("lambda", *lambda)?;
                positive("mu", *mu)
            }
            Self::G1 { nu, rho, w } => {
                if !(*nu >= 0.0 && nu.is_finite()) {
                    return Err(Error::Domain(format!("nu must be finite and nonnegative, got {nu}")));
                }
                positive("rho", *rho)?;
                positive("w", *w)
            }
            Self::Table { values } => {
                if values.is_empty() {
                    return Err(Error::Domain("table sequence is empty".into()));
                }
                for (i, v) in values.iter().enumerate() {
                    positive(&format!("g({i})"), *v)?;
                }
                Ok(())
            }
        }
    }

    /// Largest admissible index, `None` when unbounded.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            Self::Table { values } => Some(values.len() - 1),
            _ => None,
        }
    }

    /// `ln g(n)`.
    pub fn log_g(&self, n: usize) -> Result<f64> {
        let x = n as f64;
        Ok(match self {
            Self::Factorial => ln_factorial(n),
            Self::MLGamma { alpha, beta } => lgamma(alpha * x + beta),
            Self::WrightProduct { lambda, mu } => ln_factorial(n) + lgamma(lambda * x + mu),
            Self::G1 { nu, rho, w } => {
                let a = (x + nu + 1.0) / rho;
                -rho.ln() - a * w.ln() + lgamma(a)
            }
            Self::Table { values } => values
                .get(n)
                .ok_or_else(|| {
                    Error::Domain(format!(
                        "index {n} outside table of length {}",
                        values.len()
                    ))
                })?
                .ln(),
        })
    }

    /// `g(n)`; errors if the value overflows f64.
    pub fn g(&self, n: usize) -> Result<f64> {
        let v = match self {
            Self::Factorial => factorial(n),
            Self::MLGamma { alpha, beta } => gamma(alpha * n as f64 + beta)?,
            Self::WrightProduct { lambda, mu } => factorial(n) * gamma(lambda * n as f64 + mu)?,
            Self::Table { values } => *values.get(n).ok_or_else(|| {
                Error::Domain(format!("index {n} outside table of length {}", values.len()))
            })?,
            Self::G1 { .. } => self.log_g(n)?.exp(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("g({n}) overflows f64")))
        }
    }

    /// `ln g(0), ..., ln g(k)`.
    pub fn log_values(&self, k: usize) -> Result<Vec<f64>> {
        (0..=k).map(|n| self.log_g(n)).collect()
    }

    /// Ratio-test probe for convergence of `Σ uⁿ/g(n)` at every `u`.
    ///
    /// The log ratio `ln g(n+1) − ln g(n)` is sampled at `n = 10³, 10⁶, 10⁹`;
    /// strict growth across the samples means `g` outgrows every geometric
    /// sequence, so the term ratio `u g(n)/g(n+1)` tends to zero. Tables
    /// never qualify.
    pub fn series_converges(&self, u: f64) -> bool {
        if self.max_index().is_some() || !(u >= 0.0) || !u.is_finite() {
            return false;
        }
        let growth = |n: usize| -> Option<f64> { Some(self.log_g(n + 1).ok()? - self.log_g(n).ok()?) };
        match (growth(1_000), growth(1_000_000), growth(1_000_000_000)) {
            (Some(a), Some(b), Some(c)) => a < b && b < c,
            _ => false,
        }
    }
}

/// `g(n)` for `seq`.
pub fn g_eval(seq: &GSequence, n: usize) -> Result<f64> {
    seq.g(n)
}

/// `ln g(n)` for `seq`.
pub fn log_g_eval(seq: &GSequence, n: usize) -> Result<f64> {
    seq.log_g(n)
}

/// One term `c · u^ν exp(−w u^ρ) lnˡ u` of an auxiliary function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxTerm {
    pub c: f64,
    pub nu: f64,
    pub w: f64,
    pub rho: f64,
    #[serde(default)]
    pub l: u32,
}

/// Auxiliary function `f(u) = Σ_j c_j u^{ν_j} exp(−w_j u^{ρ_j}) ln^{l_j} u`
/// whose Mellin transform at `n + 1` generates `g(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AuxFunctionRepr", into = "AuxFunctionRepr")]
pub struct AuxFunction {
    terms: Vec<AuxTerm>,
}

#[derive(Serialize, Deserialize)]
struct AuxFunctionRepr {
    terms: Vec<AuxTerm>,
}

impl TryFrom<AuxFunctionRepr> for AuxFunction {
    type Error = Error;
    fn try_from(r: AuxFunctionRepr) -> Result<Self> {
        Self::new(r.terms)
    }
}

impl From<AuxFunction> for AuxFunctionRepr {
    fn from(f: AuxFunction) -> Self {
        Self { terms: f.terms }
    }
}

impl AuxFunction {
    /// `u^ν exp(−w u^ρ)`.
    pub fn single(nu: f64, rho: f64, w: f64) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::Domain(format!("nu must be finite, got {nu}")));
        }
        Self::new(vec![AuxTerm { c: 1.0, nu, w, rho, l: 0 }])
    }

    /// Multi-term function; terms must follow the asymptotic ordering, with
    /// the exponent entering as `u^{−ν}` in the ordering rule.
    pub fn new(terms: Vec<AuxTerm>) -> Result<Self> {
        let flipped: Vec<AsymptoticTerm> = terms
            .iter()
            .map(|t| AsymptoticTerm { c: t.c, nu: -t.nu, w: t.w, rho: t.rho, l: t.l })
            .collect();
        validate_family(&flipped)?;
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[AuxTerm] {
        &self.terms
    }

    pub fn eval(&self, u: f64) -> f64 {
        let lu = u.ln();
        self.terms
            .iter()
            .map(|t| t.c * (t.nu * lu - t.w * u.powf(t.rho)).exp() * lu.powi(t.l as i32))
            .sum()
    }

    /// Closed-form `∫₀^∞ f(u) u^{s−1} du` for logarithm-free terms.
    pub fn mellin_closed_form(&self, s: f64) -> Option<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            if t.l != 0 {
                return None;
            }
            let a = (s + t.nu) / t.rho;
            if a <= 0.0 {
                return None;
            }
            acc += t.c * (lgamma(a) - a * t.w.ln() - t.rho.ln()).exp();
        }
        Some(acc)
    }

    /// The sequence `g(n) = f̂(n + 1)` when `f` is a single unit term.
    pub fn as_g1(&self) -> Option<GSequence> {
        match self.terms.as_slice() {
            [t] if t.c == 1.0 && t.l == 0 && t.nu >= 0.0 => {
                Some(GSequence::G1 { nu: t.nu, rho: t.rho, w: t.w })
            }
            _ => None,
        }
    }

    /// Large-`u` family with terms `c u^{−ν'} exp(−w u^ρ) lnˡ u`, `ν' = −ν`.
    pub fn asymptotic_family(&self) -> Result<AsymptoticFamily> {
        AsymptoticFamily::new(
            self.terms
                .iter()
                .map(|t| AsymptoticTerm { c: t.c, nu: -t.nu, w: t.w, rho: t.rho, l: t.l })
                .collect(),
        )
    }
}

/// One element `c · u^{−ν} exp(−w u^ρ) lnˡ u` of an asymptotic expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticTerm {
    pub c: f64,
    pub nu: f64,
    pub w: f64,
    pub rho: f64,
    #[serde(default)]
    pub l: u32,
}

/// Ordered asymptotic expansion of an auxiliary function as `u → ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AsymptoticFamilyRepr", into = "AsymptoticFamilyRepr")]
pub struct AsymptoticFamily {
    terms: Vec<AsymptoticTerm>,
}

#[derive(Serialize, Deserialize)]
struct AsymptoticFamilyRepr {
    terms: Vec<AsymptoticTerm>,
}

impl TryFrom<AsymptoticFamilyRepr> for AsymptoticFamily {
    type Error = Error;
    fn try_from(r: AsymptoticFamilyRepr) -> Result<Self> {
        Self::new(r.terms)
    }
}

impl From<AsymptoticFamily> for AsymptoticFamilyRepr {
    fn from(f: AsymptoticFamily) -> Self {
        Self { terms: f.terms }
    }
}

// Later terms must be asymptotically smaller: ρ nondecreasing; on equal ρ,
// w increasing; on equal (ρ, w), ν increasing; on equal (ρ, w, ν), the
// logarithm power decreasing.
fn validate_family(terms: &[AsymptoticTerm]) -> Result<()> {
    if terms.is_empty() {
        return Err(Error::Domain("term list is empty".into()));
    }
    for (j, t) in terms.iter().enumerate() {
        if !t.c.is_finite() || !t.nu.is_finite() {
            return Err(Error::Domain(format!("term {j} has non-finite c or nu")));
        }
        positive(&format!("w_{j}"), t.w)?;
        positive(&format!("rho_{j}"), t.rho)?;
    }
    for (j, pair) in terms.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let ordered = if a.rho != b.rho {
            a.rho < b.rho
        } else if a.w != b.w {
            a.w < b.w
        } else if a.nu != b.nu {
            a.nu < b.nu
        } else {
            a.l > b.l
        };
        if !ordered {
            return Err(Error::Domain(format!(
                "terms {j} and {} violate the asymptotic ordering",
                j + 1
            )));
        }
    }
    Ok(())
}

impl AsymptoticFamily {
    pub fn new(terms: Vec<AsymptoticTerm>) -> Result<Self> {
        validate_family(&terms)?;
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[AsymptoticTerm] {
        &self.terms
    }

    /// Index of the first term with a nonzero coefficient.
    pub fn leading_index(&self) -> Option<usize> {
        self.terms.iter().position(|t| t.c != 0.0)
    }
}

/// `ln` of the leading large-`n` behaviour of `1/g(n)` implied by `fam`.
pub(crate) fn log_asymptotic_leading_term(fam: &AsymptoticFamily, n: usize) -> Result<f64> {
    let j0 = fam
        .leading_index()
        .ok_or_else(|| Error::Domain("all coefficients vanish".into()))?;
    let t = fam.terms[j0];
    let x = n as f64 / t.rho;
    let e = (n as f64 + 1.0 - t.nu) / t.rho;
    let mut log_v = (t.l as f64 + 1.0) * t.rho.ln() + e * t.w.ln() + x - (e - 0.5) * x.ln()
        - 0.5 * (2.0 * std::f64::consts::PI).ln();
    if t.l > 0 {
        if x <= 1.0 {
            return Err(Error::Domain(format!(
                "logarithm factor is nonpositive at n/rho = {x}"
            )));
        }
        log_v -= t.l as f64 * x.ln().ln();
    }
    if t.c < 0.0 {
        return Err(Error::Domain("leading coefficient is negative".into()));
    }
    Ok(log_v - t.c.ln())
}

/// Leading large-`n` approximation of `1/g(n)` for the sequence generated by
/// an auxiliary function with asymptotic expansion `fam`.
pub fn asymptotic_leading_term(fam: &AsymptoticFamily, n: usize) -> Result<f64> {
    Ok(log_asymptotic_leading_term(fam, n)?.exp())
}

/// `∫₀^∞ f(u) u^{s−1} du` by quadrature.
pub fn mellin_transform(f: &AuxFunction, s: f64) -> Result<f64> {
    if !(s >= 1.0) || !s.is_finite() {
        return Err(Error::Domain(format!("Mellin argument must satisfy s >= 1, got {s}")));
    }
    let r = quadrature_improper(|u| f.eval(u) * u.powf(s - 1.0), 1e-11)?;
    Ok(r.value)
}

/// Residuals `|f̂(n+1) − g(n)|/g(n)` for `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MellinLinkReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn verify_mellin_link(
    f: &AuxFunction,
    seq: &GSequence,
    n_max: usize,
    tol: f64,
) -> Result<MellinLinkReport> {
    if let Some(m) = seq.max_index() {
        if n_max > m {
            return Err(Error::Incompatible(format!(
                "n_max = {n_max} exceeds the table length {}",
                m + 1
            )));
        }
    }
    let mut residuals = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let m = mellin_transform(f, n as f64 + 1.0)?;
        // Compare in log space so the ratio stays finite for large g(n).
        let lg = seq.log_g(n)?;
        residuals.push(((m.ln() - lg).exp() - 1.0).abs());
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(MellinLinkReport {
        pass: max_residual <= tol,
        residuals,
        max_residual,
        tol,
    })
}
