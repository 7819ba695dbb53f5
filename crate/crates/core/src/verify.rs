//! Randomised invariant suites behind `bcdist verify-theorems`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bound::{eval_g, eval_g_extended, finite_diff_partials, reduced_bound_value};
use crate::capacity::{boundary_rates, rate_membership, residual_power, GaussianBC};
use crate::error::Result;
use crate::minkowski::{check_minkowski, ExtVector};
use crate::scenario::{tau_step_schedule, BroadcastScenario, DistortionTuple, TauSchedule};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Flips every pass/fail decision; used to show the harness can fail.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 1000,
            seed: 42,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    /// First few failing cases.
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.passed == self.trials
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<SuiteResult>,
    pub all_passed: bool,
    pub warnings: Vec<String>,
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random scenario: `P` and noises log-uniform on `[1e-2, 1e2]`.
/// Relative margin that clearly exceeds the rounding error of `g` for K <= 5.
const ROUNDING_FLOOR: f64 = 1e-12;

pub fn random_scenario(rng: &mut impl Rng, receivers: usize, bandwidth: f64) -> BroadcastScenario {
    loop {
        let power = log_uniform(rng, 1e-2, 1e2);
        let mut noises: Vec<f64> = (0..receivers).map(|_| log_uniform(rng, 1e-2, 1e2)).collect();
        noises.sort_by(|a, b| b.total_cmp(a));
        if let Ok(s) = BroadcastScenario::new(power, noises, bandwidth, 1.0) {
            return s;
        }
    }
}

/// Random finite schedule: `K - 1` log-uniform values on `[1e-3, 1e3]`,
/// sorted, then a trailing zero.
pub fn random_schedule(rng: &mut impl Rng, receivers: usize) -> TauSchedule {
    let mut v: Vec<f64> = (1..receivers).map(|_| log_uniform(rng, 1e-3, 1e3)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v.push(0.0);
    TauSchedule::from_values(&v).expect("sorted schedule")
}

struct Suite {
    result: SuiteResult,
    fault: bool,
}

impl Suite {
    fn new(name: &str, fault: bool) -> Self {
        Suite {
            result: SuiteResult {
                name: name.to_string(),
                trials: 0,
                passed: 0,
                failures: Vec::new(),
            },
            fault,
        }
    }

    fn record(&mut self, pass: bool, detail: impl FnOnce() -> String) {
        self.result.trials += 1;
        if pass != self.fault {
            self.result.passed += 1;
        } else if self.result.failures.len() < 5 {
            self.result.failures.push(detail());
        }
    }
}

fn matched_bandwidth(rng: &mut ChaCha8Rng, trials: usize, fault: bool) -> Result<SuiteResult> {
    let mut suite = Suite::new("matched bandwidth gives equality at D*", fault);
    for _ in 0..trials {
        let k = rng.random_range(1..=5);
        let s = random_scenario(rng, k, 1.0);
        let tau = random_schedule(rng, k);
        let g = eval_g(&s, &s.trivial_point(), &tau)?;
        let rel = (g - s.rhs()).abs() / s.rhs();
        suite.record(rel <= 1e-9, || format!("{s:?} tau={:?} rel={rel:e}", tau.values()));
    }
    Ok(suite.result)
}

fn compression(rng: &mut ChaCha8Rng, trials: usize, fault: bool) -> Result<SuiteResult> {
    let mut suite = Suite::new("compression keeps D* inside", fault);
    for _ in 0..trials {
        let k = rng.random_range(1..=5);
        let b = rng.random_range(0.05..0.95);
        let s = random_scenario(rng, k, b);
        let tau = random_schedule(rng, k);
        let g = eval_g(&s, &s.trivial_point(), &tau)?;
        suite.record(g <= s.rhs() * (1.0 + 1e-9), || format!("{s:?} tau={:?} g={g}", tau.values()));
    }
    Ok(suite.result)
}

fn expansion(rng: &mut ChaCha8Rng, trials: usize, fault: bool) -> Result<SuiteResult> {
    let mut suite = Suite::new("expansion strictly excludes D*", fault);
    for _ in 0..trials {
        let k = rng.random_range(2..=5);
        let b = rng.random_range(1.05..8.0);
        let s = random_scenario(rng, k, b);
        let mut taus = vec![0.0; k];
        taus[0] = 1.0;
        let tau = TauSchedule::from_values(&taus)?;
        let g = eval_g(&s, &s.trivial_point(), &tau)?;
        // At low SNR the true excess can sit near 1e-10 relative, so only
        // rounding error is ruled out here.
        suite.record(g > s.rhs() * (1.0 + ROUNDING_FLOOR), || format!("{s:?} g={g}"));
    }
    Ok(suite.result)
}

fn random_distortions(rng: &mut ChaCha8Rng, s: &BroadcastScenario) -> DistortionTuple {
    let v = (0..s.receivers())
        .map(|_| s.source_var() * log_uniform(rng, 1e-3, 1.0))
        .collect();
    DistortionTuple::new(v).expect("positive distortions")
}

fn step_reduction(rng: &mut ChaCha8Rng, trials: usize, fault: bool) -> Result<SuiteResult> {
    let mut suite = Suite::new("step schedules reduce to point-to-point", fault);
    for _ in 0..trials {
        let k = rng.random_range(1..=5);
        let b = log_uniform(rng, 0.05, 8.0);
        let s = random_scenario(rng, k, b);
        let d = random_distortions(rng, &s);
        let j = rng.random_range(1..=k);
        let ext = eval_g_extended(&s, &d, &tau_step_schedule(k, j)?)?.value();
        let red = reduced_bound_value(&s, &d, j)?;
        let rel = (ext - red).abs() / red;
        suite.record(rel <= 1e-12, || format!("{s:?} D={:?} k={j} rel={rel:e}", d.values()));
    }
    Ok(suite.result)
}

fn monotonicity(rng: &mut ChaCha8Rng, trials: usize, fault: bool) -> Result<SuiteResult> {
    let mut suite = Suite::new("g is nonincreasing in every D_k", fault);
    for _ in 0..trials {
        let k = rng.random_range(1..=5);
        let b = log_uniform(rng, 0.05, 8.0);
        let s = random_scenario(rng, k, b);
        let d = DistortionTuple::new(
            (0..k).map(|_| s.source_var() * rng.random_range(0.01..0.99)).collect(),
        )?;
        let tau = random_schedule(rng, k);
        let g = eval_g(&s, &d, &tau)?;
        let h = 1e-6 * d.values().iter().copied().fold(f64::INFINITY, f64::min);
        let partials = finite_diff_partials(&s, &d, &tau, h)?;
        let worst = partials
            .iter()
            .zip(d.values())
            .map(|(p, dk)| p * dk / g)
            .fold(f64::NEG_INFINITY, f64::max);
        suite.record(worst <= 1e-6, || format!("{s:?} D={:?} elasticity={worst:e}", d.values()));
    }
    Ok(suite.result)
}

fn minkowski_suite(rng: &mut ChaCha8Rng, trials: usize, fault: bool) -> Result<SuiteResult> {
    let mut suite = Suite::new("Minkowski direction and equality", fault);
    const PS: [f64; 6] = [0.2, 0.5, 0.9, 1.5, 2.0, 4.0];
    for i in 0..trials {
        let p = PS[i % PS.len()];
        let n = rng.random_range(1..=8);
        let x: Vec<f64> = (0..n).map(|_| log_uniform(rng, 1e-3, 1e3)).collect();
        let y: Vec<f64> = (0..n).map(|_| log_uniform(rng, 1e-3, 1e3)).collect();
        let lambda = log_uniform(rng, 1e-2, 1e2);
        let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let (xv, yv, sv) = (
            ExtVector::from_values(&x)?,
            ExtVector::from_values(&y)?,
            ExtVector::from_values(&scaled)?,
        );
        let free = check_minkowski(&xv, &yv, p)?;
        let dep = check_minkowski(&xv, &sv, p)?;
        suite.record(free.direction_holds && dep.equality, || {
            format!("p={p} x={x:?} y={y:?} lambda={lambda}")
        });
    }
    Ok(suite.result)
}

fn capacity_round_trip(rng: &mut ChaCha8Rng, trials: usize, fault: bool) -> Result<SuiteResult> {
    let mut suite = Suite::new("capacity boundary points invert exactly", fault);
    for _ in 0..trials {
        let k = rng.random_range(1..=5);
        let s = random_scenario(rng, k, 1.0);
        let ch = GaussianBC::from(&s);
        let b = log_uniform(rng, 0.1, 10.0);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let split: Vec<f64> = raw.iter().map(|a| a / total).collect();
        let r = boundary_rates(&ch, &split, b)?;
        let res = residual_power(&ch, &r, b);
        suite.record(rate_membership(&ch, &r, b) && res.abs() <= 1e-9 * ch.power(), || {
            format!("{s:?} split={split:?} residual={res:e}")
        });
    }
    Ok(suite.result)
}

type SuiteFn = fn(&mut ChaCha8Rng, usize, bool) -> Result<SuiteResult>;

/// Runs every suite with `opts.trials` cases each.
pub fn verify_theorems(opts: &VerifyOptions) -> Result<VerifyReport> {
    let suites: [SuiteFn; 7] = [
        matched_bandwidth,
        compression,
        expansion,
        step_reduction,
        monotonicity,
        minkowski_suite,
        capacity_round_trip,
    ];
    let mut results = Vec::with_capacity(suites.len());
    for (i, suite) in suites.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(i as u64);
        results.push(suite(&mut rng, opts.trials, opts.inject_fault)?);
    }
    let mut warnings = Vec::new();
    if opts.trials == 0 {
        warnings.push("trials = 0: every suite passes vacuously".to_string());
    }
    Ok(VerifyReport {
        seed: opts.seed,
        trials: opts.trials,
        all_passed: results.iter().all(SuiteResult::ok),
        suites: results,
        warnings,
    })
}
