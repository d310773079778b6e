//! Zeros of the truncation polynomials `Σ_{n=0}^{k} zⁿ/g(n)` and the
//! orthogonal state pairs they induce.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gseq::GSequence;
use crate::states::{StateSpec, Truncation};
use crate::{Error, Result};

pub const MAX_DEGREE: usize = 100;
/// Relative residual a root must reach to be accepted.
pub const ROOT_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 1000;

/// Roots in ascending modulus, ties broken by ascending argument in `(−π, π]`.
///
/// `residuals[i]` is `|P(rᵢ)| / Σ|zⁿ/g(n)|·|rᵢ|ⁿ`, the backward error of the
/// root relative to the size of the terms that cancel there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub residuals: Vec<f64>,
}

#[derive(Serialize)]
struct RootRow {
    re: f64,
    im: f64,
    residual: f64,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Writes `re,im,residual` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for (r, res) in self.roots.iter().zip(&self.residuals) {
            w.serialize(RootRow { re: r.re, im: r.im, residual: *res })?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Local {
    ratio: Complex64,
    residual: f64,
    condition: f64,
}

/// `a/b` without forming `|b|²`, which overflows long before `b` does.
fn cdiv(a: Complex64, b: Complex64) -> Complex64 {
    let m = b.norm();
    (a / m) * (b.conj() / m)
}

/// The polynomial in `w = z/s` with `s = (g(k)/g(0))^{1/k}`, divided by its
/// leading coefficient so that both `a₀` and `a_k` equal one.
struct Balanced {
    a: Vec<f64>,
    ln_s: f64,
}

impl Balanced {
    fn new(seq: &GSequence, k: usize) -> Result<Self> {
        let lg = seq.log_values(k)?;
        let ln_s = (lg[k] - lg[0]) / k as f64;
        let a = (0..=k)
            .map(|n| ((n as f64 - k as f64) * ln_s + lg[k] - lg[n]).exp())
            .collect::<Vec<_>>();
        if a.iter().any(|c| !c.is_finite() || *c <= 0.0) {
            return Err(Error::Domain(format!(
                "coefficients of the degree-{k} polynomial leave the f64 range after balancing"
            )));
        }
        Ok(Self { a, ln_s })
    }

    fn degree(&self) -> usize {
        self.a.len() - 1
    }

    /// Newton ratio `Q/Q′`, relative residual and root condition number at
    /// `w`, evaluated on the reversed polynomial when `|w| > 1` so that no
    /// power of `w` is ever formed.
    fn local(&self, w: Complex64) -> Local {
        let k = self.degree() as f64;
        let r = w.norm();
        let horner = |coeffs: &mut dyn Iterator<Item = f64>, x: Complex64| {
            let (mut p, mut d, mut abs) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
            for c in coeffs {
                d = d * x + p;
                p = p * x + c;
                abs = abs * x.norm() + c;
            }
            (p, d, abs)
        };
        if r <= 1.0 {
            let (p, d, abs) = horner(&mut self.a.iter().rev().copied(), w);
            Local { ratio: cdiv(p, d), residual: p.norm() / abs, condition: abs / (r * d.norm()) }
        } else {
            // Q(w) = wᵏR(v) and Q′(w) = wᵏ⁻¹(kR − vR′) with v = 1/w.
            let v = cdiv(Complex64::new(1.0, 0.0), w);
            let (p, d, abs) = horner(&mut self.a.iter().copied(), v);
            let q = k * p - v * d;
            Local { ratio: w * cdiv(p, q), residual: p.norm() / abs, condition: abs / q.norm() }
        }
    }

    /// `(Q⁽ᵈ⁾(w), Q⁽ᵈ⁺¹⁾(w))`.
    fn eval_derivative(&self, w: Complex64, d: usize) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for n in (d..self.a.len()).rev() {
            let falling: f64 = (n - d + 1..=n).map(|j| j as f64).product();
            dp = dp * w + p;
            p = p * w + self.a[n] * falling;
        }
        (p, dp)
    }

    fn residual(&self, w: Complex64) -> f64 {
        self.local(w).residual
    }

    /// Newton polish that only accepts steps lowering the residual.
    fn polish(&self, mut w: Complex64, real: bool) -> Complex64 {
        let mut best = self.residual(w);
        for _ in 0..8 {
            let step = self.local(w).ratio;
            if !step.is_finite() {
                break;
            }
            let mut next = w - step;
            if real {
                next.im = 0.0;
            }
            let r = self.residual(next);
            if !(r < best) {
                break;
            }
            best = r;
            w = next;
        }
        w
    }

    /// Initial guesses on the circles of the upper convex hull of
    /// `(n, ln aₙ)`, one circle per hull edge.
    fn initial_guesses(&self) -> Vec<Complex64> {
        let k = self.degree();
        let pts: Vec<(f64, f64)> = self.a.iter().enumerate().map(|(n, c)| (n as f64, c.ln())).collect();
        let mut hull: Vec<usize> = Vec::new();
        for i in 0..pts.len() {
            while hull.len() >= 2 {
                let (o, a) = (pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]]);
                let cross = (a.0 - o.0) * (pts[i].1 - o.1) - (a.1 - o.1) * (pts[i].0 - o.0);
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        let mut out = Vec::with_capacity(k);
        for edge in hull.windows(2) {
            let (i, j) = (edge[0], edge[1]);
            let m = j - i;
            let r = ((pts[i].1 - pts[j].1) / m as f64).exp();
            for t in 0..m {
                let angle = 2.0 * PI * (t as f64 / m as f64 + i as f64 / k as f64) + 0.7;
                out.push(Complex64::from_polar(r, angle));
            }
        }
        out
    }

    fn condition(&self, roots: &[Complex64]) -> f64 {
        roots
            .iter()
            .map(|w| self.local(*w).condition)
            .fold(0.0, f64::max)
    }

    /// Aberth–Ehrlich simultaneous iteration, Gauss–Seidel style.
    fn aberth(&self) -> Result<Vec<Complex64>> {
        let k = self.degree();
        let mut w = self.initial_guesses();
        let mut done = vec![false; k];
        for _ in 0..MAX_SWEEPS {
            for i in 0..k {
                if done[i] {
                    continue;
                }
                let local = self.local(w[i]);
                // Horner's rounding floor grows with the degree.
                if local.residual <= k as f64 * f64::EPSILON {
                    done[i] = true;
                    continue;
                }
                let ratio = local.ratio;
                let repulsion: Complex64 = (0..k).filter(|&j| j != i).map(|j| 1.0 / (w[i] - w[j])).sum();
                let mut step = ratio / (1.0 - ratio * repulsion);
                if !step.is_finite() {
                    // Coincident iterates: fall back to Newton, or nudge.
                    step = if ratio.is_finite() { ratio } else { w[i] * Complex64::new(0.0, 1e-6) };
                }
                w[i] -= step;
                if step.norm() <= 2.0 * f64::EPSILON * w[i].norm() {
                    done[i] = true;
                }
            }
            if done.iter().all(|d| *d) {
                return Ok(w);
            }
        }
        Err(Error::RootNonConvergence { degree: k, condition: self.condition(&w) })
    }
}

/// Replaces each cluster of iterates around a multiple root by a single
/// refined point.
///
/// A root of multiplicity m is only resolved to ε^{1/m} by the iterates
/// themselves, but it is a simple root of the (m−1)-th derivative, where
/// Newton converges from the cluster mean to working precision. Clusters
/// whose refined point is not a root of the polynomial are left alone.
fn merge_clusters(q: &Balanced, w: &mut [Complex64]) {
    const CLUSTER_TOL: f64 = 1e-5;
    let k = w.len();
    let mut group: Vec<usize> = (0..k).collect();
    fn find(group: &mut [usize], mut i: usize) -> usize {
        while group[i] != i {
            group[i] = group[group[i]];
            i = group[i];
        }
        i
    }
    for i in 0..k {
        for j in i + 1..k {
            if (w[i] - w[j]).norm() <= CLUSTER_TOL * w[i].norm().max(w[j].norm()) {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a] = b;
            }
        }
    }
    for g in 0..k {
        let members: Vec<usize> = (0..k).filter(|&i| find(&mut group, i) == g).collect();
        let m = members.len();
        if m < 2 {
            continue;
        }
        let mut x = members.iter().map(|&i| w[i]).sum::<Complex64>() / m as f64;
        for _ in 0..20 {
            let (p, d) = q.eval_derivative(x, m - 1);
            let step = cdiv(p, d);
            if !step.is_finite() {
                break;
            }
            x -= step;
            if step.norm() <= 4.0 * f64::EPSILON * x.norm() {
                break;
            }
        }
        if q.residual(x) <= ROOT_TOL {
            for i in members {
                w[i] = x;
            }
        }
    }
}

/// Rebuilds the set from its upper half-plane members and their mirror
/// images, snapping near-real roots onto the axis.
///
/// Ill-conditioned clusters put the lower-half iterates far from the exact
/// mirror images of the upper ones, so pairing them would mix neighbours.
/// Each upper iterate is backward accurate on its own, and with real
/// coefficients so is its conjugate.
fn symmetrize(q: &Balanced, mut w: Vec<Complex64>) -> Option<Vec<Complex64>> {
    const REAL_TOL: f64 = 1e-6;
    let k = w.len();
    merge_clusters(q, &mut w);
    let snap = |r: Complex64| {
        let x = q.polish(Complex64::new(r.re, 0.0), true);
        (q.residual(x) <= ROOT_TOL).then_some(x)
    };
    let mut real = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for r in w {
        if r.im.abs() <= REAL_TOL * r.norm() {
            if let Some(x) = snap(r) {
                real.push(x);
                continue;
            }
        }
        if r.im > 0.0 {
            upper.push(r);
        } else {
            lower.push(r);
        }
    }
    // A real root inside an ill-conditioned cluster can land well off the
    // axis; move the flattest iterates of the larger side until both match.
    let flatness = |r: &Complex64| r.im.abs() / r.norm();
    while upper.len() != lower.len() {
        let side = if upper.len() > lower.len() { &mut upper } else { &mut lower };
        let i = (0..side.len()).min_by(|&a, &b| flatness(&side[a]).total_cmp(&flatness(&side[b])))?;
        real.push(snap(side.swap_remove(i))?);
    }
    if real.len() + 2 * upper.len() != k {
        return None;
    }
    let mut out = real;
    for r in upper {
        let x = q.polish(r, false);
        out.push(x);
        out.push(x.conj());
    }
    Some(out)
}

fn root_order(a: &Complex64, b: &Complex64) -> Ordering {
    a.norm().total_cmp(&b.norm()).then_with(|| a.arg().total_cmp(&b.arg()))
}

/// All `k` roots of `Σ_{n=0}^{k} zⁿ/g(n)`.
pub fn polynomial_roots(seq: &GSequence, k: usize) -> Result<RootSet> {
    if k == 0 {
        return Err(Error::Domain("polynomial degree must be at least 1".into()));
    }
    if k > MAX_DEGREE {
        return Err(Error::Domain(format!("degree {k} exceeds the cap of {MAX_DEGREE}")));
    }
    let q = Balanced::new(seq, k)?;
    let w = if k == 1 {
        vec![Complex64::new(-1.0, 0.0)]
    } else {
        let w = q.aberth()?;
        let condition = q.condition(&w);
        symmetrize(&q, w).ok_or(Error::RootNonConvergence { degree: k, condition })?
    };
    let residuals: Vec<f64> = w.iter().map(|x| q.residual(*x)).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst <= ROOT_TOL) {
        return Err(Error::RootNonConvergence { degree: k, condition: q.condition(&w) });
    }
    let s = q.ln_s.exp();
    // Adding +0.0 turns a negative-zero imaginary part positive, so arg(−r) = π.
    let mut pairs: Vec<(Complex64, f64)> =
        w.iter().map(|x| x * s).map(|z| Complex64::new(z.re, z.im + 0.0)).zip(residuals).collect();
    pairs.sort_by(|a, b| root_order(&a.0, &b.0));
    let (roots, residuals) = pairs.into_iter().unzip();
    Ok(RootSet { roots, residuals })
}

/// Runs independent `(seq, k)` jobs in parallel; results keep input order.
pub fn polynomial_roots_batch(jobs: &[(GSequence, usize)]) -> Vec<Result<RootSet>> {
    jobs.par_iter().map(|(seq, k)| polynomial_roots(seq, *k)).collect()
}

/// Relative residuals of the Vieta identities for the product and sum of roots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VietaReport {
    pub product_residual: f64,
    pub sum_residual: f64,
}

/// `Π rᵢ = (−1)ᵏ g(k)/g(0)` and `Σ rᵢ = −g(k)/g(k−1)`.
///
/// The product is compared in log-modulus and phase so that it stays finite
/// for sequences whose `g(k)` overflows.
pub fn vieta_check(set: &RootSet, seq: &GSequence, k: usize) -> Result<VietaReport> {
    if set.len() != k || k == 0 {
        return Err(Error::Domain(format!("expected {k} roots, found {}", set.len())));
    }
    let lg = seq.log_values(k)?;
    let log_mod: f64 = set.roots.iter().map(|r| r.norm().ln()).sum();
    let phase: Complex64 = set.roots.iter().map(|r| r / r.norm()).product();
    let want_phase = if k % 2 == 0 { 1.0 } else { -1.0 };
    let want_log = lg[k] - lg[0];
    let product_residual = (log_mod - want_log).abs().exp_m1() + (phase - want_phase).norm();

    let sum: Complex64 = set.roots.iter().sum();
    let want_sum = -(lg[k] - lg[k - 1]).exp();
    let scale = set.roots.iter().map(|r| r.norm()).sum::<f64>().max(want_sum.abs());
    let sum_residual = (sum - want_sum).norm() / scale;
    Ok(VietaReport { product_residual, sum_residual })
}

/// Two truncated states whose overlap vanishes: `z₂ = root / z₁*`.
pub fn orthogonal_pair(
    seq: &GSequence,
    k: usize,
    root: Complex64,
    z1: Complex64,
) -> Result<(StateSpec, StateSpec)> {
    if !(z1.norm() > 0.0) || !z1.is_finite() {
        return Err(Error::Domain(format!("z1 must be finite and nonzero, got {z1}")));
    }
    if k == 0 || k > MAX_DEGREE {
        return Err(Error::Domain(format!("degree must lie in 1..={MAX_DEGREE}, got {k}")));
    }
    let q = Balanced::new(seq, k)?;
    let res = q.residual(root * (-q.ln_s).exp());
    if !(res <= ROOT_TOL) {
        return Err(Error::Domain(format!(
            "{root} is not a root of the degree-{k} polynomial (relative residual {res:e})"
        )));
    }
    let z2 = root / z1.conj();
    let a = StateSpec::new(seq.clone(), Truncation::Finite(k), z1)?;
    let b = StateSpec::new(seq.clone(), Truncation::Finite(k), z2)?;
    Ok((a, b))
}
