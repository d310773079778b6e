//! Acceptance suite. Runs as a plain binary so every criterion prints a
//! PASS/FAIL line; the process fails if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tgcs::cli::{cmd_mandel, cmd_probs, Grid, ParamGrid, RunConfig, Scale};
use tgcs::completeness::{kratzel_mellin_moment, kratzel_mellin_target, moment_check, WeightFunction};
use tgcs::gseq::{AuxFunction, GSequence};
use tgcs::sampler::sample_state;
use tgcs::specfun::{gamma, mittag_leffler, wright, KratzelParams};
use tgcs::states::{excitation_distribution, log_normalization_u, overlap, StateSpec, Truncation};
use tgcs::statistics::{
    correlation_g2, mandel_q, p_asymptotic, p_exact, q2_zero_crossing, q_k1, q_k2, q_large_label_approx,
    q_series, q_small_label_sign, small_label_ratio, AsymptoticKind, QSign, Regime,
};
use tgcs::zeros::{orthogonal_pair, polynomial_roots, vieta_check};

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 { 0.0 } else { (a - b).abs() / s }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Non-canonical sequence with parameters in moderate ranges.
fn random_seq(rng: &mut ChaCha8Rng) -> GSequence {
    match rng.random_range(0..3) {
        0 => GSequence::MLGamma { alpha: rng.random_range(0.2..3.0), beta: rng.random_range(0.2..3.0) },
        1 => GSequence::WrightProduct { lambda: rng.random_range(0.2..2.0), mu: rng.random_range(0.2..3.0) },
        _ => GSequence::G1 {
            nu: rng.random_range(0.0..2.0),
            rho: rng.random_range(0.5..3.0),
            w: rng.random_range(0.5..2.0),
        },
    }
}

fn random_spec(rng: &mut ChaCha8Rng, k_min: usize, allow_infinite: bool) -> StateSpec {
    let seq = random_seq(rng);
    let k = if allow_infinite && rng.random_bool(0.2) {
        Truncation::Infinite
    } else {
        Truncation::Finite(rng.random_range(k_min..=15))
    };
    let z = rng.random_range(0.3f64.ln()..4.0f64.ln()).exp();
    StateSpec::real(seq, k, z).expect("valid spec")
}

fn criterion_1() -> Outcome {
    let mut worst_exp: f64 = 0.0;
    let mut worst_cosh: f64 = 0.0;
    for x in linspace(0.0, 30.0, 301) {
        worst_exp = worst_exp.max(rel(mittag_leffler(1.0, 1.0, x).map_err(err)?, x.exp()));
        worst_cosh = worst_cosh.max(rel(mittag_leffler(2.0, 1.0, x * x).map_err(err)?, x.cosh()));
    }
    ensure(worst_exp <= 1e-13, || format!("E(1,1) vs exp: {worst_exp:e}"))?;
    ensure(worst_cosh <= 1e-10, || format!("E(2,1) vs cosh: {worst_cosh:e}"))?;

    // W(1,1)(x) = Σ xⁿ/(n!)², summed exactly over 200 terms.
    let mut worst_w: f64 = 0.0;
    for (num, den) in [(1i64, 10i64), (1, 2), (1, 1), (3, 1), (10, 1), (25, 1), (60, 1)] {
        let x = BigRational::new(BigInt::from(num), BigInt::from(den));
        let mut term = BigRational::one();
        let mut sum = BigRational::zero();
        for n in 0..200u32 {
            if n > 0 {
                let nn = BigRational::from_integer(BigInt::from(n));
                term = term * &x / (&nn * &nn);
            }
            sum += &term;
        }
        let want = sum.to_f64().expect("finite");
        let got = wright(1.0, 1.0, num as f64 / den as f64).map_err(err)?;
        worst_w = worst_w.max(rel(got, want));
    }
    ensure(worst_w <= 1e-12, || format!("W(1,1) vs exact series: {worst_w:e}"))?;

    let sqrt_pi = std::f64::consts::PI.sqrt();
    let mut worst_0: f64 = 0.0;
    for (lambda, mu, want) in [(1.0, 1.0, 1.0), (0.5, 0.5, 1.0 / sqrt_pi), (2.0, 2.0, 1.0), (0.3, 3.0, 0.5), (1.5, 1.5, 2.0 / sqrt_pi)] {
        worst_0 = worst_0.max((wright(lambda, mu, 0.0).map_err(err)? - want).abs());
    }
    ensure(worst_0 <= 1e-14, || format!("W(0) vs 1/Gamma(mu): {worst_0:e}"))?;
    Ok(format!("exp {worst_exp:.1e}, cosh {worst_cosh:.1e}, wright {worst_w:.1e}, W(0) {worst_0:.1e}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (nu, rho, w) = (rng.random_range(0.0..2.0), rng.random_range(0.5..3.0), rng.random_range(0.5..2.0));
        let seq = GSequence::g1(nu, rho, w).map_err(err)?;
        for x in [0.5f64, 1.0, 5.0] {
            let series = log_normalization_u(&seq, Truncation::Infinite, x).map_err(err)?.exp();
            let a = 1.0 / rho;
            let closed = rho * w.powf((nu + 1.0) / rho) * mittag_leffler(a, (nu + 1.0) / rho, w.powf(a) * x).map_err(err)?;
            worst = worst.max(rel(series, closed));
        }
    }
    ensure(worst <= 1e-10, || format!("max rel {worst:e}"))?;
    Ok(format!("max rel {worst:.1e} over 15 points"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_sum: f64 = 0.0;
    for _ in 0..100 {
        let spec = random_spec(&mut rng, 1, true);
        let d = excitation_distribution(&spec).map_err(err)?;
        worst_sum = worst_sum.max((d.probs.iter().sum::<f64>() - 1.0).abs());
    }
    ensure(worst_sum <= 1e-12, || format!("sum of p off by {worst_sum:e}"))?;

    let seqs = [
        GSequence::Factorial,
        GSequence::MLGamma { alpha: 0.5, beta: 0.5 },
        GSequence::WrightProduct { lambda: 0.5, mu: 0.5 },
        GSequence::G1 { nu: 0.5, rho: 2.0, w: 1.5 },
    ];
    for seq in &seqs {
        let d = excitation_distribution(&StateSpec::real(seq.clone(), 10, 0.0).map_err(err)?).map_err(err)?;
        ensure(d.probs[0] == 1.0 && d.probs[1..].iter().all(|p| *p == 0.0), || format!("{seq:?}: not a delta at z=0"))?;
    }

    let mut worst_slope: f64 = 0.0;
    let small = logspace(1e-3, 1e-2, 12);
    let large = logspace(1e2, 1e3, 12);
    for seq in &seqs {
        for k in [2usize, 5, 10] {
            for n in 1..=3.min(k) {
                let ys: Vec<f64> = small
                    .iter()
                    .map(|z| p_exact(seq, Truncation::Finite(k), n, z * z).map(f64::ln))
                    .collect::<Result<_, _>>()
                    .map_err(err)?;
                let lx: Vec<f64> = small.iter().map(|z| z.ln()).collect();
                let s = slope(&lx, &ys);
                worst_slope = worst_slope.max(rel(s, 2.0 * n as f64));
            }
            let ys: Vec<f64> = large
                .iter()
                .map(|z| p_exact(seq, Truncation::Finite(k), 0, z * z).map(f64::ln))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            let lx: Vec<f64> = large.iter().map(|z| z.ln()).collect();
            worst_slope = worst_slope.max(rel(slope(&lx, &ys), -2.0 * k as f64));
            let top = p_exact(seq, Truncation::Finite(k), k, 1e6).map_err(err)?;
            ensure(top > 0.99, || format!("{seq:?} k={k}: p(k) at |z|=1e3 is {top}"))?;
        }
    }
    ensure(worst_slope <= 0.02, || format!("log-log slope off by {worst_slope:e}"))?;
    Ok(format!("sum {worst_sum:.1e}, worst slope rel {worst_slope:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let spec = random_spec(&mut rng, 1, true);
        let q = mandel_q(&spec).map_err(err)?.q;
        let (seq, u) = (spec.seq(), spec.u());
        let mut forms = Vec::new();
        match spec.k() {
            Truncation::Finite(1) => forms.push(q_k1(seq, u).map_err(err)?),
            Truncation::Finite(2) => {
                forms.push(q_k2(seq, u).map_err(err)?);
                forms.push(q_series(seq, spec.k(), u).map_err(err)?);
            }
            k => forms.push(q_series(seq, k, u).map_err(err)?),
        }
        for f in forms {
            let r = rel(q, f);
            ensure(r <= 1e-10, || format!("{spec:?}: Q {q} vs closed form {f} ({r:e})"))?;
            worst = worst.max(r);
        }
    }
    let mut worst_canon: f64 = 0.0;
    for z in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let q = mandel_q(&StateSpec::real(GSequence::Factorial, Truncation::Infinite, z).map_err(err)?).map_err(err)?.q;
        worst_canon = worst_canon.max(q.abs());
    }
    ensure(worst_canon <= 1e-12, || format!("canonical |Q| = {worst_canon:e}"))?;

    // Relative error of the |z|⁻² correction term.
    let correction_error = |seq: &GSequence, k: usize, r: f64| -> Result<f64, String> {
        let z = Complex64::new(r, 0.0);
        let q = mandel_q(&StateSpec::new(seq.clone(), k, z).map_err(err)?).map_err(err)?.q;
        Ok(rel(q + 1.0, q_large_label_approx(seq, k, z).map_err(err)? + 1.0))
    };
    let worst_large = correction_error(&GSequence::MLGamma { alpha: 0.5, beta: 0.5 }, 5, 100.0)?;
    ensure(worst_large <= 1e-3, || format!("large-label correction off by {worst_large:e}"))?;
    // Elsewhere the neglected terms are O(|z|⁻²) relative to the correction.
    let mut worst_decay: f64 = 0.0;
    for seq in [
        GSequence::Factorial,
        GSequence::MLGamma { alpha: 0.5, beta: 0.5 },
        GSequence::MLGamma { alpha: 2.0, beta: 1.0 },
        GSequence::WrightProduct { lambda: 1.0, mu: 1.0 },
        GSequence::G1 { nu: 0.5, rho: 2.0, w: 1.5 },
    ] {
        for k in [2usize, 5, 10] {
            let decay = correction_error(&seq, k, 1000.0)? / correction_error(&seq, k, 100.0)?;
            ensure(decay <= 0.02, || format!("{seq:?} k={k}: correction error shrinks only by {decay:e}"))?;
            worst_decay = worst_decay.max(decay);
        }
    }
    Ok(format!("cross-form {worst:.1e}, canonical {worst_canon:.1e}, large-label {worst_large:.1e} (decay {worst_decay:.1e})"))
}

fn criterion_5() -> Outcome {
    let grid = [0.1, 0.5, 1.0, 2.0, 4.0];
    let z = 1e-3;
    let mut compared = 0;
    for &a in &grid {
        for &b in &grid {
            let seq = GSequence::MLGamma { alpha: a, beta: b };
            let k = Truncation::Finite(10);
            let predicted = q_small_label_sign(&seq, k).map_err(err)?;
            let q = mandel_q(&StateSpec::real(seq.clone(), k, z).map_err(err)?).map_err(err)?.q;
            match predicted {
                QSign::Positive => ensure(q > 0.0, || format!("ML({a},{b}): predicted +, Q = {q:e}"))?,
                QSign::Negative => ensure(q < 0.0, || format!("ML({a},{b}): predicted -, Q = {q:e}"))?,
                QSign::DependsOnHigherOrder => continue,
            }
            compared += 1;
            let seq = GSequence::WrightProduct { lambda: a, mu: b };
            let sign = q_small_label_sign(&seq, k).map_err(err)?;
            let q = mandel_q(&StateSpec::real(seq, k, z).map_err(err)?).map_err(err)?.q;
            ensure(sign == QSign::Negative && q < 0.0, || format!("Wright({a},{b}): {sign:?}, Q = {q:e}"))?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_zeta: f64 = 0.0;
    let mut found = 0;
    while found < 10 {
        let seq = random_seq(&mut rng);
        if small_label_ratio(&seq).map_err(err)? >= 2.0 {
            continue;
        }
        let zeta = q2_zero_crossing(&seq).map_err(err)?.ok_or("no crossing for ratio < 2")?;
        // Q₂ is positive at small u and negative at large u.
        let (mut lo, mut hi) = (1e-12f64, 1.0f64);
        while q_k2(&seq, hi).map_err(err)? > 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q_k2(&seq, mid).map_err(err)? > 0.0 { lo = mid } else { hi = mid }
        }
        worst_zeta = worst_zeta.max((zeta - (0.5 * (lo + hi)).sqrt()).abs());
        found += 1;
    }
    ensure(worst_zeta <= 1e-9, || format!("zeta0 vs bisection: {worst_zeta:e}"))?;

    let mut worst_boundary = f64::NEG_INFINITY;
    for u in [1e-4, 0.01, 1.0, 100.0] {
        worst_boundary = worst_boundary.max(q_k2(&GSequence::Factorial, u).map_err(err)?);
    }
    ensure(worst_boundary < 0.0, || format!("canonical Q2 = {worst_boundary}"))?;
    Ok(format!("{compared} ML sign cells, zeta0 {worst_zeta:.1e}, canonical Q2 < 0"))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut compared = 0;
    for _ in 0..200 {
        let spec = random_spec(&mut rng, 2, true);
        let q = mandel_q(&spec).map_err(err)?.q;
        if q.abs() <= 1e-9 {
            continue;
        }
        let g2 = correlation_g2(&spec).map_err(err)?;
        let by_g2 = if g2 > 1.0 { Regime::SuperPoissonian } else { Regime::SubPoissonian };
        ensure(by_g2 == Regime::classify(q), || format!("{spec:?}: Q = {q}, g2 = {g2}"))?;
        compared += 1;
    }
    for seq in [GSequence::Factorial, GSequence::MLGamma { alpha: 0.5, beta: 0.5 }, GSequence::WrightProduct { lambda: 1.0, mu: 1.0 }] {
        for z in [0.1, 1.0, 10.0] {
            let spec = StateSpec::real(seq.clone(), 1, z).map_err(err)?;
            let (g2, q) = (correlation_g2(&spec).map_err(err)?, mandel_q(&spec).map_err(err)?.q);
            ensure(g2 == 0.0 && q < 0.0, || format!("k=1 {seq:?}: g2 = {g2}, Q = {q}"))?;
        }
    }
    Ok(format!("{compared} classifications agree; k=1 gives g2 = 0"))
}

fn criterion_7() -> Outcome {
    let mut worst_ml: f64 = 0.0;
    for (alpha, beta) in [(1.0, 1.0), (0.5, 0.5), (2.0, 1.0), (0.1, 0.1)] {
        let w = WeightFunction::ML { alpha, beta, k: Truncation::Infinite };
        worst_ml = worst_ml.max(moment_check(&w, 6, 1e-8).map_err(err)?.max_residual);
    }
    let mut worst_wright: f64 = 0.0;
    for (lambda, mu) in [(1.0, 1.0), (0.5, 0.5)] {
        let w = WeightFunction::Wright { lambda, mu, k: Truncation::Infinite };
        worst_wright = worst_wright.max(moment_check(&w, 4, 1e-6).map_err(err)?.max_residual);
    }
    let mut worst_g1: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let (nu, rho, w) = (rng.random_range(0.0..2.0), rng.random_range(0.5..3.0), rng.random_range(0.5..2.0));
        let f = AuxFunction::single(nu, rho, w).map_err(err)?;
        let seq = GSequence::g1(nu, rho, w).map_err(err)?;
        let wf = WeightFunction::General { f, seq, k: Truncation::Infinite };
        worst_g1 = worst_g1.max(moment_check(&wf, 6, 1e-6).map_err(err)?.max_residual);
    }
    let mut worst_k: f64 = 0.0;
    for (lambda, mu) in [(1.0, 1.0), (0.5, 0.5), (2.0, 1.0)] {
        let p = KratzelParams::new(lambda, mu).map_err(err)?;
        for s in [1.0, 2.0, 3.0] {
            let want = gamma(s).map_err(err)? * gamma(lambda * s + mu - lambda).map_err(err)?;
            ensure(rel(kratzel_mellin_target(&p, s), want) <= 1e-14, || "target mismatch".into())?;
            worst_k = worst_k.max(rel(kratzel_mellin_moment(&p, s).map_err(err)?, want));
        }
    }
    ensure(worst_ml <= 1e-8, || format!("ML {worst_ml:e}"))?;
    ensure(worst_wright <= 1e-6, || format!("Wright {worst_wright:e}"))?;
    ensure(worst_g1 <= 1e-6, || format!("G1 {worst_g1:e}"))?;
    ensure(worst_k <= 1e-6, || format!("Kratzel {worst_k:e}"))?;
    Ok(format!("ML {worst_ml:.1e}, Wright {worst_wright:.1e}, G1 {worst_g1:.1e}, Kratzel {worst_k:.1e}"))
}

fn criterion_8() -> Outcome {
    let cases = [
        (GSequence::MLGamma { alpha: 1.0, beta: 1.0 }, AsymptoticKind::ML { alpha: 1.0, beta: 1.0 }, 40usize),
        (GSequence::WrightProduct { lambda: 1.0, mu: 1.0 }, AsymptoticKind::Wright { lambda: 1.0, mu: 1.0 }, 30),
    ];
    let mut summary = Vec::new();
    for (seq, kind, n_check) in cases {
        let norm = log_normalization_u(&seq, Truncation::Infinite, 1.0).map_err(err)?.exp();
        let ratio = |n: usize| -> Result<f64, String> {
            Ok(p_asymptotic(&kind, n, 1.0, norm).map_err(err)? / p_exact(&seq, Truncation::Infinite, n, 1.0).map_err(err)?)
        };
        let r = ratio(n_check)?;
        ensure((0.97..=1.03).contains(&r), || format!("{seq:?}: ratio {r} at n={n_check}"))?;
        let mut prev = f64::INFINITY;
        for n in 20..=60 {
            let d = (ratio(n)? - 1.0).abs();
            ensure(d < prev, || format!("{seq:?}: |ratio - 1| not decreasing at n={n}"))?;
            prev = d;
        }
        summary.push(format!("{r:.4} at n={n_check}"));
    }
    Ok(summary.join(", "))
}

fn criterion_9() -> Outcome {
    let seqs = [
        GSequence::Factorial,
        GSequence::MLGamma { alpha: 0.5, beta: 0.5 },
        GSequence::MLGamma { alpha: 2.0, beta: 1.0 },
        GSequence::MLGamma { alpha: 0.1, beta: 0.1 },
        GSequence::WrightProduct { lambda: 1.0, mu: 1.0 },
        GSequence::WrightProduct { lambda: 0.5, mu: 0.5 },
        GSequence::G1 { nu: 0.5, rho: 2.0, w: 1.5 },
    ];
    let (mut worst_root, mut worst_overlap, mut worst_vieta): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for seq in &seqs {
        for k in 1..=20 {
            let roots = polynomial_roots(seq, k).map_err(err)?;
            worst_root = worst_root.max(roots.max_residual());
            let v = vieta_check(&roots, seq, k).map_err(err)?;
            worst_vieta = worst_vieta.max(v.product_residual).max(v.sum_residual);
            for z1 in [Complex64::new(0.7, 0.3), Complex64::new(2.0, 0.0)] {
                for &root in &roots.roots {
                    let (a, b) = orthogonal_pair(seq, k, root, z1).map_err(err)?;
                    worst_overlap = worst_overlap.max(overlap(&a, &b).map_err(err)?.norm());
                }
            }
        }
    }
    ensure(worst_root <= 1e-9, || format!("root residual {worst_root:e}"))?;
    ensure(worst_overlap <= 1e-9, || format!("overlap {worst_overlap:e}"))?;
    ensure(worst_vieta <= 1e-9, || format!("Vieta {worst_vieta:e}"))?;
    Ok(format!("roots {worst_root:.1e}, overlap {worst_overlap:.1e}, Vieta {worst_vieta:.1e}"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_z: f64 = 0.0;
    for i in 0..10u64 {
        let spec = random_spec(&mut rng, 2, false);
        let q = mandel_q(&spec).map_err(err)?.q;
        let run = sample_state(&spec, 1_000_000, 1000 + i).map_err(err)?;
        let (q_hat, se) = (run.q_hat.ok_or("no q_hat")?, run.stderr_q.ok_or("no stderr")?);
        let z = (q_hat - q).abs() / se;
        ensure(z <= 4.0, || format!("{spec:?}: q_hat {q_hat} vs Q {q}, {z:.2} stderr"))?;
        worst_z = worst_z.max(z);
        let again = sample_state(&spec, 1_000_000, 1000 + i).map_err(err)?;
        ensure(again == run, || format!("{spec:?}: rerun differs"))?;
    }
    Ok(format!("worst |q_hat - Q| = {worst_z:.2} stderr; reruns identical"))
}

fn figure_config(seq: GSequence, k: usize) -> RunConfig {
    RunConfig {
        seq: Some(seq),
        k: Some(Truncation::Finite(k)),
        z_grid: Some(Grid::new(0.0, 10.0, 101, Scale::Linear)),
        ..RunConfig::default()
    }
}

fn criterion_11() -> Outcome {
    let figures = [
        (GSequence::MLGamma { alpha: 0.5, beta: 0.5 }, 10usize, "alpha"),
        (GSequence::MLGamma { alpha: 0.1, beta: 0.1 }, 20, "alpha"),
        (GSequence::WrightProduct { lambda: 0.5, mu: 0.5 }, 10, "lambda"),
        (GSequence::WrightProduct { lambda: 0.1, mu: 0.1 }, 20, "lambda"),
    ];
    let mut cells = 0;
    for (seq, k, param) in figures {
        let cfg = figure_config(seq.clone(), k);
        let rows = cmd_probs(&cfg).map_err(err)?;
        let at = |z: f64| rows.iter().filter(move |r| r.abs_z == z);
        ensure(at(0.0).all(|r| r.p == if r.n == 0 { 1.0 } else { 0.0 }), || format!("{seq:?}: z=0 row is not a delta"))?;
        let top = at(10.0).max_by(|a, b| a.p.total_cmp(&b.p)).ok_or("no |z|=10 row")?;
        ensure(top.n == k, || format!("{seq:?}: |z|=10 peak at n={}", top.n))?;
        let sum: f64 = at(10.0).map(|r| r.p).sum();
        ensure((sum - 1.0).abs() <= 1e-12, || format!("{seq:?}: |z|=10 row sums to {sum}"))?;

        // Q surface: parameter sweep with the other parameter fixed.
        let cfg = RunConfig {
            z_grid: Some(Grid::new(0.01, 10.0, 40, Scale::Log)),
            param_grid: Some(ParamGrid { name: param.into(), min: 0.1, max: 6.0, points: 60, scale: Scale::Linear }),
            ..cfg
        };
        let rows = cmd_mandel(&cfg).map_err(err)?;
        cells += rows.len();
        for r in rows.iter().filter(|r| r.abs_z == 0.01) {
            let p = r.param.ok_or("missing parameter column")?;
            let s = swept(&seq, p);
            let want = q_small_label_sign(&s, Truncation::Finite(k)).map_err(err)?;
            let ok = match want {
                QSign::Positive => r.q > 0.0,
                QSign::Negative => r.q < 0.0,
                QSign::DependsOnHigherOrder => true,
            };
            ensure(ok, || format!("{s:?}: |z|=0.01 Q = {:e}, predicted {want:?}", r.q))?;
            if matches!(seq, GSequence::WrightProduct { .. }) {
                ensure(want == QSign::Negative, || format!("{s:?}: predicted {want:?}"))?;
            }
        }
        for r in rows.iter().filter(|r| r.abs_z == 10.0) {
            ensure(r.q < 0.0, || format!("{seq:?} param {:?}: |z|=10 Q = {}", r.param, r.q))?;
        }
    }
    Ok(format!("4 probability surfaces, {cells} Q cells"))
}

fn swept(seq: &GSequence, v: f64) -> GSequence {
    match seq {
        GSequence::MLGamma { beta, .. } => GSequence::MLGamma { alpha: v, beta: *beta },
        GSequence::WrightProduct { mu, .. } => GSequence::WrightProduct { lambda: v, mu: *mu },
        other => other.clone(),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("special-function identities", criterion_1),
        ("normalization identity", criterion_2),
        ("distribution properties", criterion_3),
        ("Q cross-validation", criterion_4),
        ("small-label sign theory", criterion_5),
        ("g2/Q equivalence", criterion_6),
        ("completeness moments", criterion_7),
        ("asymptotics", criterion_8),
        ("zeros and orthogonality", criterion_9),
        ("sampler", criterion_10),
        ("figure regeneration", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
