//! Monte Carlo check that uncoded transmission reaches the point-to-point
//! distortions when the bandwidths match.
//!
//! Each source sample `S ~ N(0, N_S)` is sent as `X = sqrt(P / N_S) S`;
//! receiver `k` sees `Y_k = X + Z_k` with `Z_k ~ N(0, N_k)` and estimates
//! `S_hat_k = sqrt(P N_S) / (P + N_k) Y_k`.
//!
//! Samples are generated in fixed-size chunks. Chunk `c` draws from a
//! ChaCha8 stream seeded with the run seed and stream id `c`, so the result
//! does not depend on how chunks are spread across threads; partial sums
//! are reduced in chunk order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::BroadcastScenario;

pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.9) seed_from_u64(seed), stream = chunk index; StandardNormal (rand_distr 0.5 ziggurat)";
pub const CHUNK_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    scenario: BroadcastScenario,
    samples: usize,
    seed: u64,
}

impl SimConfig {
    pub fn new(scenario: BroadcastScenario, samples: usize, seed: u64) -> Result<Self> {
        if scenario.bandwidth() != 1.0 {
            return Err(Error::BandwidthNotOne(scenario.bandwidth()));
        }
        if samples == 0 {
            return Err(Error::NoSamples);
        }
        Ok(SimConfig {
            scenario,
            samples,
            seed,
        })
    }

    pub fn scenario(&self) -> &BroadcastScenario {
        &self.scenario
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub generator: String,
    pub seed: u64,
    pub samples: usize,
    /// Mean squared error per receiver.
    pub empirical: Vec<f64>,
    /// Point-to-point distortions `D_k*`.
    pub theoretical: Vec<f64>,
    /// Standard error of each mean.
    pub std_err: Vec<f64>,
    /// Mean of `X^2`.
    pub power_empirical: f64,
    pub power_std_err: f64,
}

/// Sums of a statistic and its square.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn merge(&mut self, o: Moments) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn mean(&self, n: usize) -> f64 {
        self.sum / n as f64
    }

    // with a single sample the value itself stands in for the spread
    fn std_err(&self, n: usize) -> f64 {
        if n < 2 {
            return self.sum.abs();
        }
        let nf = n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / nf) / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    }
}

fn run_chunk(s: &BroadcastScenario, seed: u64, chunk: usize, len: usize) -> (Moments, Vec<Moments>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    let ns = s.source_var();
    let p = s.power();
    let gain = (p / ns).sqrt();
    let src_sd = ns.sqrt();
    let noise_sd: Vec<f64> = s.noises().iter().map(|n| n.sqrt()).collect();
    let est: Vec<f64> = s.noises().iter().map(|n| (p * ns).sqrt() / (p + n)).collect();

    let mut power = Moments::default();
    let mut errs = vec![Moments::default(); noise_sd.len()];
    for _ in 0..len {
        let src = src_sd * rng.sample::<f64, _>(StandardNormal);
        let x = gain * src;
        power.push(x * x);
        for (k, m) in errs.iter_mut().enumerate() {
            let y = x + noise_sd[k] * rng.sample::<f64, _>(StandardNormal);
            let e = src - est[k] * y;
            m.push(e * e);
        }
    }
    (power, errs)
}

/// Runs the analog scheme. Deterministic in `(cfg, seed)` regardless of the
/// thread count.
pub fn run_analog(cfg: &SimConfig) -> SimReport {
    let s = &cfg.scenario;
    let m = cfg.samples;
    let chunks = m.div_ceil(CHUNK_SIZE);
    let partial: Vec<(Moments, Vec<Moments>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_SIZE.min(m - c * CHUNK_SIZE);
            run_chunk(s, cfg.seed, c, len)
        })
        .collect();

    let k = s.receivers();
    let mut power = Moments::default();
    let mut errs = vec![Moments::default(); k];
    for (p, e) in partial {
        power.merge(p);
        for (acc, v) in errs.iter_mut().zip(e) {
            acc.merge(v);
        }
    }
    SimReport {
        generator: GENERATOR.to_string(),
        seed: cfg.seed,
        samples: m,
        empirical: errs.iter().map(|e| e.mean(m)).collect(),
        theoretical: s.trivial_point().values().to_vec(),
        std_err: errs.iter().map(|e| e.std_err(m)).collect(),
        power_empirical: power.mean(m),
        power_std_err: power.std_err(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(power: f64, m: usize, seed: u64) -> SimConfig {
        let s = BroadcastScenario::new(power, vec![3.0, 1.0], 1.0, 1.0).unwrap();
        SimConfig::new(s, m, seed).unwrap()
    }

    #[test]
    fn rejects_mismatched_bandwidth() {
        let s = BroadcastScenario::new(3.0, vec![3.0, 1.0], 2.0, 1.0).unwrap();
        assert_eq!(SimConfig::new(s.clone(), 10, 1), Err(Error::BandwidthNotOne(2.0)));
        let s = s.with_bandwidth(1.0).unwrap();
        assert_eq!(SimConfig::new(s, 0, 1), Err(Error::NoSamples));
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let c = cfg(3.0, 200_000, 11);
        let a = run_analog(&c);
        let b = run_analog(&c);
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| run_analog(&c));
        assert_eq!(a, single);
        assert_ne!(a, run_analog(&cfg(3.0, 200_000, 12)));
    }

    #[test]
    fn approaches_trivial_distortions() {
        let r = run_analog(&cfg(3.0, 300_000, 5));
        for k in 0..2 {
            let tol = (3.0 * r.std_err[k]).max(1e-2 * r.theoretical[k]);
            assert!((r.empirical[k] - r.theoretical[k]).abs() <= tol, "{r:?}");
        }
        assert!((r.power_empirical - 3.0).abs() <= 3.0 * r.power_std_err);
    }

    #[test]
    fn negligible_power_leaves_source_variance() {
        let r = run_analog(&cfg(1e-6, 100_000, 3));
        for k in 0..2 {
            assert!((r.empirical[k] - 1.0).abs() < 0.02, "{r:?}");
        }
    }

    #[test]
    fn single_sample_is_valid() {
        let r = run_analog(&cfg(3.0, 1, 9));
        assert_eq!(r.samples, 1);
        assert!(r.empirical.iter().chain(&r.std_err).all(|v| *v >= 0.0));
    }
}
