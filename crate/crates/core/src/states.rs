//! Truncated and untruncated generalized coherent states.
//!
//! Everything except overlaps depends on the label only through `u = |z|²`,
//! which is computed once per call so that labels differing by a phase give
//! bit-identical results.

use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::completeness::{moment_value, WeightFunction};
use crate::error::{Error, Result};
use crate::gseq::GSequence;
use crate::specfun::{log_series, log_sum_exp, truncated_series_scaled, SeriesEvalPolicy};

/// Highest Fock level, finite or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truncation {
    Finite(usize),
    Infinite,
}

impl Truncation {
    pub fn finite(&self) -> Option<usize> {
        match self {
            Self::Finite(k) => Some(*k),
            Self::Infinite => None,
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(k) => write!(f, "{k}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl From<usize> for Truncation {
    fn from(k: usize) -> Self {
        Self::Finite(k)
    }
}

impl Serialize for Truncation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(k) => s.serialize_u64(*k as u64),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Truncation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Truncation;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Truncation, E> {
                Ok(Truncation::Finite(v as usize))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Truncation, E> {
                usize::try_from(v)
                    .map(Truncation::Finite)
                    .map_err(|_| E::custom(format!("negative truncation {v}")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Truncation, E> {
                match v {
                    "inf" | "Infinite" | "infinite" => Ok(Truncation::Infinite),
                    _ => Err(E::custom(format!("unknown truncation {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

pub(crate) mod complex_object {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct ReIm {
        re: f64,
        #[serde(default)]
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ReIm { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let r = ReIm::deserialize(d)?;
        Ok(Complex64::new(r.re, r.im))
    }
}

/// A coherent state `|z; k, g⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateSpecRepr", into = "StateSpecRepr")]
pub struct StateSpec {
    seq: GSequence,
    k: Truncation,
    z: Complex64,
}

#[derive(Serialize, Deserialize)]
struct StateSpecRepr {
    seq: GSequence,
    k: Truncation,
    #[serde(with = "complex_object")]
    z: Complex64,
}

impl TryFrom<StateSpecRepr> for StateSpec {
    type Error = Error;
    fn try_from(r: StateSpecRepr) -> Result<Self> {
        Self::new(r.seq, r.k, r.z)
    }
}

impl From<StateSpec> for StateSpecRepr {
    fn from(s: StateSpec) -> Self {
        Self { seq: s.seq, k: s.k, z: s.z }
    }
}

impl StateSpec {
    pub fn new(seq: GSequence, k: impl Into<Truncation>, z: Complex64) -> Result<Self> {
        let k = k.into();
        seq.validate()?;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("label must be finite, got {z}")));
        }
        match k {
            Truncation::Finite(k) => {
                if let Some(m) = seq.max_index() {
                    if k > m {
                        return Err(Error::Domain(format!(
                            "truncation {k} exceeds the table length {}",
                            m + 1
                        )));
                    }
                }
            }
            Truncation::Infinite => {
                if !seq.series_converges(z.norm_sqr()) {
                    return Err(Error::Divergent(format!(
                        "sum of u^n/g(n) fails the ratio test for {seq:?}"
                    )));
                }
            }
        }
        Ok(Self { seq, k, z })
    }

    /// Convenience constructor for a real label.
    pub fn real(seq: GSequence, k: impl Into<Truncation>, x: f64) -> Result<Self> {
        Self::new(seq, k, Complex64::new(x, 0.0))
    }

    pub fn seq(&self) -> &GSequence {
        &self.seq
    }

    pub fn k(&self) -> Truncation {
        self.k
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// `u = |z|²`.
    pub fn u(&self) -> f64 {
        self.z.norm_sqr()
    }

    pub fn with_z(&self, z: Complex64) -> Result<Self> {
        Self::new(self.seq.clone(), self.k, z)
    }
}

/// `ln(uⁿ/g(n))` for `n = 0..=k`, or up to the adaptive cutoff when `k` is
/// infinite.
pub(crate) fn log_terms(seq: &GSequence, k: Truncation, u: f64) -> Result<Vec<f64>> {
    if u == 0.0 {
        return Ok(vec![-seq.log_g(0)?]);
    }
    let ln_u = u.ln();
    match k {
        Truncation::Finite(k) => Ok(seq
            .log_values(k)?
            .into_iter()
            .enumerate()
            .map(|(n, lg)| n as f64 * ln_u - lg)
            .collect()),
        Truncation::Infinite => {
            if !seq.series_converges(u) {
                return Err(Error::Divergent(format!(
                    "sum of u^n/g(n) fails the ratio test for {seq:?}"
                )));
            }
            let policy = SeriesEvalPolicy::default();
            // Errors from the closure surface as NaN and are rejected there.
            let s = log_series(
                |n| seq.log_g(n).map(|lg| n as f64 * ln_u - lg).unwrap_or(f64::NAN),
                &policy,
            )?;
            Ok(s.log_terms)
        }
    }
}

/// `ln 𝔑(u)` for the sequence and truncation.
pub fn log_normalization_u(seq: &GSequence, k: Truncation, u: f64) -> Result<f64> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("u must be finite and nonnegative, got {u}")));
    }
    Ok(log_sum_exp(&log_terms(seq, k, u)?))
}

/// `𝔑 = Σ_{n≤k} |z|²ⁿ/g(n)`.
pub fn normalization(spec: &StateSpec) -> Result<f64> {
    let l = log_normalization_u(&spec.seq, spec.k, spec.u())?;
    let v = l.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("normalization overflows f64 (ln = {l})")))
    }
}

/// Probabilities `p(n) = |z|²ⁿ/(𝔑 g(n))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationDistribution {
    pub probs: Vec<f64>,
    /// `𝔑`; `+∞` when only `log_norm` is representable.
    pub norm: f64,
    pub log_norm: f64,
}

impl ExcitationDistribution {
    /// Builds a distribution from raw probabilities, checking that they are
    /// valid and sum to one.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Domain("probabilities must lie in [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs, norm: 1.0, log_norm: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

pub(crate) fn distribution_u(seq: &GSequence, k: Truncation, u: f64) -> Result<ExcitationDistribution> {
    if u == 0.0 {
        let len = k.finite().map_or(1, |k| k + 1);
        let mut probs = vec![0.0; len];
        probs[0] = 1.0;
        let log_norm = -seq.log_g(0)?;
        return Ok(ExcitationDistribution { probs, norm: log_norm.exp(), log_norm });
    }
    let logs = log_terms(seq, k, u)?;
    let log_norm = log_sum_exp(&logs);
    let probs = logs.iter().map(|l| (l - log_norm).exp()).collect();
    Ok(ExcitationDistribution { probs, norm: log_norm.exp(), log_norm })
}

pub fn excitation_distribution(spec: &StateSpec) -> Result<ExcitationDistribution> {
    distribution_u(&spec.seq, spec.k, spec.u())
}

/// Fock coefficients `𝔑^{−1/2} zⁿ/√g(n)`, `n = 0..=k`.
pub fn amplitudes(spec: &StateSpec) -> Result<Vec<Complex64>> {
    if spec.k == Truncation::Infinite {
        return Err(Error::Domain("amplitudes require a finite truncation".into()));
    }
    let dist = excitation_distribution(spec)?;
    let theta = spec.z.arg();
    Ok(dist
        .probs
        .iter()
        .enumerate()
        .map(|(n, p)| Complex64::from_polar(p.sqrt(), n as f64 * theta))
        .collect())
}

fn is_canonical(seq: &GSequence) -> bool {
    match seq {
        GSequence::Factorial => true,
        GSequence::MLGamma { alpha, beta } => *alpha == 1.0 && *beta == 1.0,
        GSequence::G1 { nu, rho, w } => *nu == 0.0 && *rho == 1.0 && *w == 1.0,
        _ => false,
    }
}

/// `⟨a|b⟩ = T(z_a* z_b)/√(T(|z_a|²)T(|z_b|²))`.
pub fn overlap(a: &StateSpec, b: &StateSpec) -> Result<Complex64> {
    if a.seq != b.seq {
        return Err(Error::Incompatible("states use different sequences".into()));
    }
    if a.k != b.k {
        return Err(Error::Incompatible(format!("truncations differ: {} vs {}", a.k, b.k)));
    }
    let w = a.z.conj() * b.z;
    match a.k {
        Truncation::Finite(k) => {
            let (v, scale) = truncated_series_scaled(&a.seq, k, w)?;
            let la = log_normalization_u(&a.seq, a.k, a.u())?;
            let lb = log_normalization_u(&b.seq, b.k, b.u())?;
            Ok(v * (scale - 0.5 * (la + lb)).exp())
        }
        Truncation::Infinite if is_canonical(&a.seq) => Ok((w - 0.5 * (a.u() + b.u())).exp()),
        Truncation::Infinite => Err(Error::Incompatible(
            "overlaps of untruncated states are only available for the canonical sequence".into(),
        )),
    }
}

/// A state given by its Fock coefficients `⟨n|φ⟩`, `n = 0..=k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockVector {
    pub coeffs: Vec<Complex64>,
}

impl FockVector {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("Fock vector is empty".into()));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Domain("Fock vector has non-finite entries".into()));
        }
        Ok(Self { coeffs })
    }

    /// Number state `|m⟩` in a space of dimension `k + 1`.
    pub fn basis(k: usize, m: usize) -> Result<Self> {
        if m > k {
            return Err(Error::Domain(format!("level {m} exceeds truncation {k}")));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[m] = Complex64::new(1.0, 0.0);
        Ok(Self { coeffs })
    }

    pub fn k(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

fn check_len(phi: &FockVector, k: usize) -> Result<()> {
    if phi.coeffs.len() != k + 1 {
        return Err(Error::Incompatible(format!(
            "Fock vector has {} entries, expected {}",
            phi.coeffs.len(),
            k + 1
        )));
    }
    Ok(())
}

/// Bargmann function `Σ ⟨n|φ⟩ z̄ⁿ/√g(n)`.
pub fn bargmann_poly(phi: &FockVector, seq: &GSequence, k: usize, zbar: Complex64) -> Result<Complex64> {
    check_len(phi, k)?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for (n, c) in phi.coeffs.iter().enumerate() {
        acc += c * power * (-0.5 * seq.log_g(n)?).exp();
        power *= zbar;
    }
    Ok(acc)
}

/// `∫ Ψ(z̄)* Φ(z̄) U(|z|²)/𝔑(|z|²) d²z` for Bargmann functions of `psi` and
/// `phi`.
///
/// The angular integral keeps only equal powers, so the result is
/// `Σ_n ψ_n* φ_n M_n/g(n)` with radial moments `M_n = π∫U/𝔑 uⁿ du`.
pub fn bargmann_inner_product(
    psi: &FockVector,
    phi: &FockVector,
    seq: &GSequence,
    k: usize,
    weight: &WeightFunction,
) -> Result<Complex64> {
    check_len(psi, k)?;
    check_len(phi, k)?;
    let wseq = weight.seq();
    for n in 0..=k {
        let (a, b) = (seq.log_g(n)?, wseq.log_g(n)?);
        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(Error::Incompatible(format!(
                "weight belongs to a different sequence (g({n}) differs)"
            )));
        }
    }
    if let Some(wk) = weight.truncation().finite() {
        if wk != k {
            return Err(Error::Incompatible(format!("weight truncation {wk} differs from {k}")));
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..=k {
        let c = psi.coeffs[n].conj() * phi.coeffs[n];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let m = moment_value(weight, n)?;
        acc += c * (m.ln() - seq.log_g(n)?).exp();
    }
    Ok(acc)
}
