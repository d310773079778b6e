//! Monte-Carlo excitation-count measurements and empirical Q and g².

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::states::{excitation_distribution, ExcitationDistribution, StateSpec};
use crate::{Error, Result};

/// Generator contract: ChaCha20 with 20 rounds from `rand_chacha` 0.9,
/// seeded through `SeedableRng::seed_from_u64`, uniform draws via
/// `Rng::random::<f64>()`.
pub const GENERATOR: &str = "chacha20/rand_chacha-0.9/seed_from_u64";

/// Samples per substream. Fixed so the substream layout, and therefore the
/// result, never depends on the number of worker threads.
pub const SHARD_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRun {
    pub generator: String,
    pub seed: u64,
    pub n_samples: usize,
    /// `counts[n]` for `n = 0..=k`.
    pub counts: Vec<u64>,
    /// `var̂/mean̂ − 1` with the unbiased variance; `None` when the mean
    /// count is zero or fewer than two samples were drawn.
    pub q_hat: Option<f64>,
    /// `Σn(n−1)/N ÷ (Σn/N)²`; `None` when the mean count is zero.
    pub g2_hat: Option<f64>,
    /// Delete-one jackknife standard errors.
    pub stderr_q: Option<f64>,
    pub stderr_g2: Option<f64>,
    pub shard_size: usize,
    /// Seed of every substream, in order.
    pub shard_seeds: Vec<u64>,
}

#[derive(Serialize)]
struct HistogramRow {
    n: usize,
    count: u64,
    frequency: f64,
}

impl SampleRun {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Writes `n,count,frequency` rows.
    pub fn write_histogram_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for (n, &count) in self.counts.iter().enumerate() {
            let frequency = count as f64 / self.n_samples as f64;
            w.serialize(HistogramRow { n, count, frequency })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Running sums for the estimators, with exact removal of one sample.
#[derive(Debug, Clone, Copy)]
struct Sums {
    n: f64,
    mean: f64,
    /// `Σ(x − mean)²`.
    m2: f64,
    /// `Σx(x − 1)`.
    f2: f64,
}

impl Sums {
    fn from_counts(counts: &[u64]) -> Self {
        let n: u64 = counts.iter().sum();
        let s1: u128 = counts.iter().enumerate().map(|(x, &c)| x as u128 * c as u128).sum();
        let f2: u128 = counts
            .iter()
            .enumerate()
            .map(|(x, &c)| (x as u128) * (x as u128).saturating_sub(1) * c as u128)
            .sum();
        let nf = n as f64;
        let mean = s1 as f64 / nf;
        let m2 = counts
            .iter()
            .enumerate()
            .map(|(x, &c)| c as f64 * (x as f64 - mean).powi(2))
            .sum();
        Self { n: nf, mean, m2, f2: f2 as f64 }
    }

    fn without(&self, x: f64) -> Self {
        let n = self.n - 1.0;
        let mean = (self.n * self.mean - x) / n;
        Self { n, mean, m2: self.m2 - (x - self.mean) * (x - mean), f2: self.f2 - x * (x - 1.0) }
    }

    fn q(&self) -> Option<f64> {
        (self.n >= 2.0 && self.mean > 0.0).then(|| self.m2 / (self.n - 1.0) / self.mean - 1.0)
    }

    fn g2(&self) -> Option<f64> {
        (self.n >= 1.0 && self.mean > 0.0).then(|| self.f2 / (self.n * self.mean * self.mean))
    }
}

/// `√((N−1)/N · Σᵢ(θ₍ᵢ₎ − θ̄)²)` over all samples, grouped by value.
fn jackknife(counts: &[u64], full: &Sums, est: impl Fn(&Sums) -> Option<f64>) -> Option<f64> {
    let mut thetas = Vec::new();
    for (x, &c) in counts.iter().enumerate() {
        if c > 0 {
            thetas.push((c as f64, est(&full.without(x as f64))?));
        }
    }
    let n = full.n;
    let mean = thetas.iter().map(|(c, t)| c * t).sum::<f64>() / n;
    let ss: f64 = thetas.iter().map(|(c, t)| c * (t - mean).powi(2)).sum();
    Some(((n - 1.0) / n * ss).sqrt())
}

fn shard_seeds(seed: u64, shards: usize) -> Vec<u64> {
    let mut master = ChaCha20Rng::seed_from_u64(seed);
    (0..shards).map(|_| master.next_u64()).collect()
}

fn draw_shard(cdf: &[f64], seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let total = *cdf.last().expect("nonempty support");
    let last = cdf.len() - 1;
    let mut counts = vec![0u64; cdf.len()];
    for _ in 0..n {
        let u = rng.random::<f64>() * total;
        let i = cdf.partition_point(|&c| c <= u).min(last);
        counts[i] += 1;
    }
    counts
}

/// Draws `n_samples` i.i.d. excitation counts by inverse CDF.
pub fn sample_counts(dist: &ExcitationDistribution, n_samples: usize, seed: u64) -> Result<SampleRun> {
    if n_samples == 0 {
        return Err(Error::Domain("n_samples must be at least 1".into()));
    }
    if dist.is_empty() || dist.probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::Domain("distribution must be nonempty with finite nonnegative weights".into()));
    }
    let cdf: Vec<f64> = dist
        .probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    if !(cdf[cdf.len() - 1] > 0.0) {
        return Err(Error::Domain("distribution has zero total mass".into()));
    }
    let shards = n_samples.div_ceil(SHARD_SIZE);
    let seeds = shard_seeds(seed, shards);
    let counts = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| draw_shard(&cdf, s, SHARD_SIZE.min(n_samples - i * SHARD_SIZE)))
        .reduce(
            || vec![0u64; cdf.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let sums = Sums::from_counts(&counts);
    let q_hat = sums.q();
    let g2_hat = sums.g2();
    let stderr_q = q_hat.and_then(|_| jackknife(&counts, &sums, Sums::q));
    let stderr_g2 = g2_hat.and_then(|_| jackknife(&counts, &sums, Sums::g2));
    Ok(SampleRun {
        generator: GENERATOR.to_string(),
        seed,
        n_samples,
        counts,
        q_hat,
        g2_hat,
        stderr_q,
        stderr_g2,
        shard_size: SHARD_SIZE,
        shard_seeds: seeds,
    })
}

/// [`sample_counts`] on the excitation distribution of a state. Untruncated
/// states use the support kept by the adaptive tail cut.
pub fn sample_state(spec: &StateSpec, n_samples: usize, seed: u64) -> Result<SampleRun> {
    sample_counts(&excitation_distribution(spec)?, n_samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: &[f64]) -> ExcitationDistribution {
        ExcitationDistribution::from_probs(p.to_vec()).unwrap()
    }

    #[test]
    fn kronecker_at_zero() {
        let r = sample_counts(&dist(&[1.0, 0.0, 0.0]), 1000, 7).unwrap();
        assert_eq!(r.counts, vec![1000, 0, 0]);
        assert_eq!(r.q_hat, None);
        assert_eq!(r.g2_hat, None);
        assert_eq!(r.stderr_q, None);
    }

    #[test]
    fn deterministic_and_total() {
        let d = dist(&[0.2, 0.3, 0.5]);
        let a = sample_counts(&d, 200_001, 42).unwrap();
        let b = sample_counts(&d, 200_001, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.iter().sum::<u64>(), 200_001);
        assert_eq!(a.shard_seeds.len(), 4);
        assert_ne!(a.counts, sample_counts(&d, 200_001, 43).unwrap().counts);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(sample_counts(&dist(&[1.0]), 0, 1).is_err());
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let counts = vec![3u64, 5, 2, 1];
        let xs: Vec<f64> = counts
            .iter()
            .enumerate()
            .flat_map(|(x, &c)| std::iter::repeat_n(x as f64, c as usize))
            .collect();
        let q_of = |v: &[f64]| {
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
            var / m - 1.0
        };
        let n = xs.len();
        let thetas: Vec<f64> = (0..n)
            .map(|i| q_of(&[&xs[..i], &xs[i + 1..]].concat()))
            .collect();
        let tbar = thetas.iter().sum::<f64>() / n as f64;
        let want = ((n as f64 - 1.0) / n as f64 * thetas.iter().map(|t| (t - tbar).powi(2)).sum::<f64>()).sqrt();
        let sums = Sums::from_counts(&counts);
        assert!((sums.q().unwrap() - q_of(&xs)).abs() < 1e-14);
        assert!((jackknife(&counts, &sums, Sums::q).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn histogram_csv() {
        let r = sample_counts(&dist(&[1.0, 0.0]), 4, 1).unwrap();
        let mut buf = Vec::new();
        r.write_histogram_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,count,frequency\n0,4,1.0\n1,0,0.0\n");
    }
}
