//! Gamma, Mittag-Leffler, Wright, truncated generalized exponentials and
//! the Krätzel kernel.
//!
//! Every series here has nonnegative terms for the nonnegative real
//! arguments used throughout the crate, so the sums are evaluated directly in
//! log space and truncated with a rigorous geometric tail bound once the
//! terms start to decrease.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gseq::GSequence;
use crate::quadrature::trapezoid_log_concave;

/// Truncation control for infinite series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvalPolicy {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesEvalPolicy {
    fn default() -> Self {
        Self {
            abs_tol: f64::MIN_POSITIVE,
            rel_tol: f64::EPSILON / 4.0,
            max_terms: 10_000,
        }
    }
}

impl SeriesEvalPolicy {
    pub fn new(abs_tol: f64, rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_terms == 0 {
            return Err(Error::Domain(format!(
                "invalid series policy: abs_tol={abs_tol}, rel_tol={rel_tol}, max_terms={max_terms}"
            )));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_terms,
        })
    }
}

/// Parameters of the Krätzel kernel `λ⁻¹∫₀^∞ v^{μ/λ−2} exp(−u/v − v^{1/λ}) dv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KratzelParams {
    lambda: f64,
    mu: f64,
}

impl KratzelParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!(
                "Krätzel parameters must be positive, got lambda={lambda}, mu={mu}"
            )));
        }
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

const FACTORIAL_TABLE_LEN: usize = 171;

static FACTORIALS: [f64; FACTORIAL_TABLE_LEN] = {
    let mut t = [1.0f64; FACTORIAL_TABLE_LEN];
    let mut i = 1;
    while i < FACTORIAL_TABLE_LEN {
        t[i] = t[i - 1] * i as f64;
        i += 1;
    }
    t
};

/// `n!` for `n ≤ 170`, `+∞` beyond.
pub fn factorial(n: usize) -> f64 {
    FACTORIALS.get(n).copied().unwrap_or(f64::INFINITY)
}

/// `ln n!`, exact to rounding for every `n`.
pub fn ln_factorial(n: usize) -> f64 {
    match FACTORIALS.get(n) {
        Some(f) => f.ln(),
        None => ln_gamma_stirling(n as f64 + 1.0),
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// ζ(k) for k = 2..=31.
const ZETA: [f64; 30] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_925_9,
    1.000_000_059_608_189_1,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334,
    1.000_000_001_862_659_7,
    1.000_000_000_931_327_4,
    1.000_000_000_465_662_9,
];

// ln Γ(1 + t) for |t| ≤ 0.2.
fn ln_gamma_1p_series(t: f64) -> f64 {
    let mut acc = 0.0;
    let mut power = -t;
    for (i, z) in ZETA.iter().enumerate() {
        let k = (i + 2) as f64;
        power *= -t;
        acc += z * power / k;
    }
    -EULER_GAMMA * t + acc
}

const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_89e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];

fn ln_gamma_lanczos(x: f64) -> f64 {
    let mut y = x;
    let tmp = x + 671.0 / 128.0;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = 0.999_999_999_999_997_092;
    for c in LANCZOS {
        y += 1.0;
        ser += c / y;
    }
    tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

fn ln_gamma_stirling(x: f64) -> f64 {
    const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let corr = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0 - inv2 * 691.0 / 360_360.0)))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + corr
}

/// `ln Γ(x)` without argument validation; callers guarantee `x > 0`.
pub(crate) fn lgamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "lgamma called with {x}");
    if x.fract() == 0.0 && x >= 1.0 && x <= FACTORIAL_TABLE_LEN as f64 {
        return FACTORIALS[x as usize - 1].ln();
    }
    if (x - 1.0).abs() <= 0.2 {
        return ln_gamma_1p_series(x - 1.0);
    }
    if (x - 2.0).abs() <= 0.2 {
        let t = x - 2.0;
        return t.ln_1p() + ln_gamma_1p_series(t);
    }
    if x < 0.8 {
        return lgamma(x + 1.0) - x.ln();
    }
    if x >= 10.0 {
        return ln_gamma_stirling(x);
    }
    ln_gamma_lanczos(x)
}

/// Natural logarithm of the Gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(lgamma(x))
}

/// Γ(x) for `x > 0`; exact for small positive integers.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x.fract() == 0.0 && x <= FACTORIAL_TABLE_LEN as f64 {
        return Ok(FACTORIALS[x as usize - 1]);
    }
    Ok(lgamma(x).exp())
}

/// A nonnegative series evaluated in log space.
#[derive(Debug, Clone)]
pub(crate) struct LogSeries {
    pub log_terms: Vec<f64>,
    pub log_sum: f64,
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compensated `ln Σ exp(l_n)`.
pub(crate) fn log_sum_exp(log_terms: &[f64]) -> f64 {
    let max = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &l in log_terms {
        let y = (l - max).exp() - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    max + sum.ln()
}

/// Sums `Σ_{n≥0} exp(log_term(n))` for a unimodal sequence of terms.
///
/// Terminates once the terms decrease and the geometric tail bound
/// `t_n r/(1 − r)` falls below `abs_tol + rel_tol·sum`.
pub(crate) fn log_series<F: Fn(usize) -> f64>(
    log_term: F,
    policy: &SeriesEvalPolicy,
) -> Result<LogSeries> {
    let ln_abs = policy.abs_tol.ln();
    let ln_rel = policy.rel_tol.ln();
    let mut log_terms = Vec::new();
    let mut running = f64::NEG_INFINITY;
    for n in 0..policy.max_terms {
        let l = log_term(n);
        if l.is_nan() || l == f64::INFINITY {
            return Err(Error::Domain(format!("series term {n} is not finite")));
        }
        log_terms.push(l);
        running = log_add_exp(running, l);
        if n == 0 {
            continue;
        }
        let prev = log_terms[n - 1];
        if l == f64::NEG_INFINITY {
            break;
        }
        let log_ratio = l - prev;
        if log_ratio < 0.0 {
            // ln(r / (1 - r))
            let log_tail = l + log_ratio - (-(log_ratio.exp_m1())).ln();
            let threshold = log_add_exp(ln_abs, ln_rel + running);
            if log_tail <= threshold {
                return Ok(LogSeries {
                    log_sum: log_sum_exp(&log_terms),
                    log_terms,
                });
            }
        }
    }
    let last = *log_terms.last().unwrap_or(&f64::NAN);
    Err(Error::SeriesNonConvergence {
        terms: log_terms.len(),
        partial_sum: running.exp(),
        last_term: last.exp(),
    })
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

fn check_argument(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument must be a finite nonnegative real, got {x}")))
    }
}

fn finite_exp(l: f64) -> Result<f64> {
    let v = l.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("value exp({l}) overflows f64")))
    }
}

/// `ln E_{α,β}(x)` for `x ≥ 0`.
pub fn log_mittag_leffler_with(
    alpha: f64,
    beta: f64,
    x: f64,
    policy: &SeriesEvalPolicy,
) -> Result<f64> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    check_argument(x)?;
    if x == 0.0 {
        return Ok(-lgamma(beta));
    }
    let ln_x = x.ln();
    let s = log_series(|n| n as f64 * ln_x - lgamma(alpha * n as f64 + beta), policy)?;
    Ok(s.log_sum)
}

/// Mittag-Leffler function `E_{α,β}(x) = Σ xⁿ/Γ(αn+β)` for real `x ≥ 0`.
pub fn mittag_leffler(alpha: f64, beta: f64, x: f64) -> Result<f64> {
    mittag_leffler_with(alpha, beta, x, &SeriesEvalPolicy::default())
}

pub fn mittag_leffler_with(alpha: f64, beta: f64, x: f64, policy: &SeriesEvalPolicy) -> Result<f64> {
    if x == 0.0 {
        check_positive("alpha", alpha)?;
        return Ok(1.0 / gamma(beta)?);
    }
    finite_exp(log_mittag_leffler_with(alpha, beta, x, policy)?)
}

/// `ln W_{λ,μ}(x)` for `x ≥ 0`.
pub fn log_wright_with(lambda: f64, mu: f64, x: f64, policy: &SeriesEvalPolicy) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("mu", mu)?;
    check_argument(x)?;
    if x == 0.0 {
        return Ok(-lgamma(mu));
    }
    let ln_x = x.ln();
    let s = log_series(
        |n| n as f64 * ln_x - ln_factorial(n) - lgamma(lambda * n as f64 + mu),
        policy,
    )?;
    Ok(s.log_sum)
}

/// Wright function `W_{λ,μ}(x) = Σ xⁿ/(n! Γ(λn+μ))` for real `x ≥ 0`.
pub fn wright(lambda: f64, mu: f64, x: f64) -> Result<f64> {
    wright_with(lambda, mu, x, &SeriesEvalPolicy::default())
}

pub fn wright_with(lambda: f64, mu: f64, x: f64, policy: &SeriesEvalPolicy) -> Result<f64> {
    if x == 0.0 {
        check_positive("lambda", lambda)?;
        return Ok(1.0 / gamma(mu)?);
    }
    finite_exp(log_wright_with(lambda, mu, x, policy)?)
}

/// Degree-`k` polynomial `Σ_{n=0}^{k} zⁿ/g(n)`, returned as `(value, ln_scale)`
/// with the true value equal to `value · exp(ln_scale)`.
///
/// The scale is the largest term modulus, which keeps the evaluation finite
/// for labels and sequences far outside the f64 range of the raw terms.
pub fn truncated_series_scaled(g: &GSequence, k: usize, z: Complex64) -> Result<(Complex64, f64)> {
    let log_g = g.log_values(k)?;
    let r = z.norm();
    if r == 0.0 {
        return Ok((Complex64::new(1.0, 0.0), -log_g[0]));
    }
    let ln_r = r.ln();
    let theta = z.arg();
    let logs: Vec<f64> = log_g
        .iter()
        .enumerate()
        .map(|(n, lg)| n as f64 * ln_r - lg)
        .collect();
    let scale = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut re = (0.0, 0.0);
    let mut im = (0.0, 0.0);
    let kahan = |acc: &mut (f64, f64), v: f64| {
        let y = v - acc.1;
        let t = acc.0 + y;
        acc.1 = (t - acc.0) - y;
        acc.0 = t;
    };
    for (n, l) in logs.iter().enumerate() {
        let m = (l - scale).exp();
        let (s, c) = (n as f64 * theta).sin_cos();
        kahan(&mut re, m * c);
        kahan(&mut im, m * s);
    }
    Ok((Complex64::new(re.0, im.0), scale))
}

/// Truncated generalized exponential `Σ_{n=0}^{k} zⁿ/g(n)`.
pub fn truncated_series(g: &GSequence, k: usize, z: Complex64) -> Result<Complex64> {
    let (v, scale) = truncated_series_scaled(g, k, z)?;
    let f = scale.exp();
    if !f.is_finite() {
        return Err(Error::Domain(format!(
            "truncated series overflows f64 (ln scale {scale})"
        )));
    }
    Ok(v * f)
}

// eˣ − 1 − x without cancellation for small x.
fn exp_tail2(x: f64) -> f64 {
    if x.abs() > 0.5 {
        return x.exp_m1() - x;
    }
    let mut term = 0.5 * x * x;
    let mut acc = term;
    let mut k = 2.0;
    while k < 40.0 && term.abs() > 1e-17 * acc.abs() {
        k += 1.0;
        term *= x / k;
        acc += term;
    }
    acc
}

/// `ln` of the Krätzel kernel; finite where the kernel itself underflows.
pub fn log_kratzel_kernel(p: &KratzelParams, u: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("Krätzel kernel requires u > 0, got {u}")));
    }
    let a = p.mu / p.lambda - 1.0;
    let inv_l = 1.0 / p.lambda;
    // The substitution v = e^t gives the log-concave exponent
    // φ(t) = a t − u e^{−t} − e^{t/λ}; φ' is strictly decreasing.
    let dphi = |t: f64| a + u * (-t).exp() - inv_l * (t * inv_l).exp();
    let mut lo = -1.0;
    while dphi(lo) <= 0.0 {
        lo *= 2.0;
    }
    let mut hi = 1.0;
    while dphi(hi) >= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dphi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + mid.abs()) {
            break;
        }
    }
    let mode = 0.5 * (lo + hi);
    // φ(mode + s) − φ(mode) = φ'(mode) s − L e₂(−s) − R e₂(s/λ) with
    // e₂(x) = eˣ − 1 − x, which stays accurate when L and R are huge.
    let left = u * (-mode).exp();
    let right = (mode * inv_l).exp();
    let peak = a * mode - left - right;
    let slope = a + left - inv_l * right;
    let log_f = move |s: f64| slope * s - left * exp_tail2(-s) - right * exp_tail2(s * inv_l);
    // The float `mode` may sit many widths away from the true maximum when
    // the peak is extremely narrow; Newton steps in `s` recover it.
    let mut centre: f64 = 0.0;
    for _ in 0..50 {
        let d1 = slope + left * (-centre).exp_m1() - inv_l * right * (centre * inv_l).exp_m1();
        let d2 = left * (-centre).exp() + inv_l * inv_l * right * (centre * inv_l).exp();
        let step = d1 / d2;
        centre += step;
        if !(step.abs() > 1e-15 * (1.0 + centre.abs()) / d2.sqrt().max(1.0)) {
            break;
        }
    }
    if !centre.is_finite() {
        centre = 0.0;
    }
    // Re-expand around the refined centre so the integrand is O(1) there.
    let top = log_f(centre);
    let left_c = left * (-centre).exp();
    let right_c = right * (centre * inv_l).exp();
    let slope_c = slope + left * (-centre).exp_m1() - inv_l * right * (centre * inv_l).exp_m1();
    let log_g = move |x: f64| slope_c * x - left_c * exp_tail2(-x) - right_c * exp_tail2(x * inv_l);
    let curvature = left_c + inv_l * inv_l * right_c;
    // Beyond this curvature the peak is narrower than the float spacing of
    // the mode and the Laplace approximation is exact to double precision
    // (its first correction is of relative order 1/curvature).
    if curvature > 1e16 {
        return Ok(peak + top + 0.5 * (2.0 * std::f64::consts::PI / curvature).ln() - p.lambda.ln());
    }
    // The curvature underestimates the width badly when the peak is flat
    // (tiny u), so measure the distance to a unit drop on each side.
    let start = (1.0 / curvature.sqrt()).min(1.0);
    let unit_drop = |dir: f64| {
        let mut d = start;
        while log_g(dir * d) > -1.0 {
            d *= 2.0;
        }
        d
    };
    let width = unit_drop(1.0).min(unit_drop(-1.0));
    let (offset, scaled) = trapezoid_log_concave(log_g, 0.0, width, 1e-13)?;
    Ok(peak + top + offset + scaled.ln() - p.lambda.ln())
}

/// Krätzel kernel `λ⁻¹∫₀^∞ v^{μ/λ−2} exp(−u/v − v^{1/λ}) dv`, the inverse
/// Mellin transform of `Γ(s)Γ(λs + μ − λ)`.
pub fn kratzel_kernel(p: &KratzelParams, u: f64) -> Result<f64> {
    Ok(log_kratzel_kernel(p, u)?.exp())
}
