//! Evaluation of the outer-bound functional
//!
//! ```text
//! g(D) = sum_k dN_k [ ((N_S + tau_k) / (D_1 + tau_1)) prod_{j=2..k} (D_j + tau_{j-1}) / (D_j + tau_j) ]^(1/b)
//! ```
//!
//! against its right-hand side `P + N_1`. Each term is accumulated as a sum
//! of log-ratios and exponentiated once, so large `K` and small `b` do not
//! overflow intermediate products.
//!
//! Infinite `tau` entries are handled as a common divergent parameter: in
//! every term the number of factors containing it is the same in numerator
//! and denominator, so those factors cancel and only the finite factors
//! remain.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::scenario::{BroadcastScenario, DistortionTuple, TauSchedule};

/// Default relative tolerance for comparing `g` against `P + N_1`.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Result of comparing `g` with `P + N_1` for one schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEvaluation {
    pub lhs: ExtReal,
    pub rhs: f64,
    pub satisfied: bool,
    /// `rhs - lhs`, snapped to 0 when within tolerance.
    pub slack: f64,
}

/// Unchecked evaluation. `taus` uses `f64::INFINITY` for `+inf`; callers
/// guarantee lengths, ordering and `D_k > 0`.
pub(crate) fn eval_raw(s: &BroadcastScenario, d: &[f64], taus: &[f64]) -> f64 {
    let ns = s.source_var();
    let inv_b = 1.0 / s.bandwidth();
    let (d1, t1) = (d[0], taus[0]);
    let mut chain = 0.0;
    let mut total = 0.0;
    for k in 0..d.len() {
        let tk = taus[k];
        if k > 0 {
            let (prev, dj) = (taus[k - 1], d[k]);
            if prev.is_infinite() {
                if tk.is_finite() {
                    chain -= (dj + tk).ln();
                }
            } else {
                chain += ((prev - tk) / (dj + tk)).ln_1p();
            }
        }
        let head = match (tk.is_infinite(), t1.is_infinite()) {
            (false, false) => {
                let den = d1 + t1;
                let x = ((tk - t1) + (ns - d1)) / den;
                // ln_1p loses digits as x approaches -1
                if x > -0.5 {
                    x.ln_1p()
                } else {
                    (ns + tk).ln() - den.ln()
                }
            }
            (false, true) => (ns + tk).ln(),
            _ => 0.0,
        };
        total += s.delta_noise(k) * ((head + chain) * inv_b).exp();
    }
    total
}

fn check_inputs(s: &BroadcastScenario, d: &DistortionTuple, tau: &TauSchedule) -> Result<()> {
    s.check_distortions(d)?;
    s.check_schedule(tau)
}

/// `g(D)` for a schedule with only finite entries.
pub fn eval_g(s: &BroadcastScenario, d: &DistortionTuple, tau: &TauSchedule) -> Result<f64> {
    check_inputs(s, d, tau)?;
    if !tau.is_finite() {
        return Err(Error::NonFiniteTau);
    }
    Ok(eval_raw(s, d.values(), &tau.values()))
}

/// `g(D)` for any schedule, including `+inf` entries.
pub fn eval_g_extended(
    s: &BroadcastScenario,
    d: &DistortionTuple,
    tau: &TauSchedule,
) -> Result<ExtReal> {
    check_inputs(s, d, tau)?;
    let v = eval_raw(s, d.values(), &tau.values());
    // overflow of a term is the only way to leave the reals here
    Ok(ExtReal::new(v).unwrap_or(ExtReal::INFINITY))
}

/// Closed form of `g` at [`tau_step_schedule`](crate::scenario::tau_step_schedule)`(K, k)`:
/// `(N_1 - N_k) + N_k (N_S / D_k)^(1/b)`.
pub fn reduced_bound_value(s: &BroadcastScenario, d: &DistortionTuple, k: usize) -> Result<f64> {
    s.check_distortions(d)?;
    if k == 0 || k > s.receivers() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: s.receivers(),
        });
    }
    let n = s.noises();
    let nk = n[k - 1];
    Ok((n[0] - nk) + nk * (s.source_var() / d.values()[k - 1]).powf(1.0 / s.bandwidth()))
}

/// Compares `g` with `P + N_1` using [`DEFAULT_TOLERANCE`].
pub fn check_inequality(
    s: &BroadcastScenario,
    d: &DistortionTuple,
    tau: &TauSchedule,
) -> Result<BoundEvaluation> {
    check_inequality_with(s, d, tau, DEFAULT_TOLERANCE)
}

/// Compares `g` with `P + N_1`; `lhs <= rhs (1 + tol)` counts as satisfied.
pub fn check_inequality_with(
    s: &BroadcastScenario,
    d: &DistortionTuple,
    tau: &TauSchedule,
    tol: f64,
) -> Result<BoundEvaluation> {
    let lhs = eval_g_extended(s, d, tau)?;
    let rhs = s.rhs();
    Ok(compare(lhs, rhs, tol))
}

pub(crate) fn compare(lhs: ExtReal, rhs: f64, tol: f64) -> BoundEvaluation {
    let raw = rhs - lhs.value();
    let slack = if raw.abs() <= tol * rhs { 0.0 } else { raw };
    BoundEvaluation {
        lhs,
        rhs,
        satisfied: slack >= 0.0,
        slack,
    }
}

/// Central finite-difference estimates of `dg/dD_k` for every `k`.
pub fn finite_diff_partials(
    s: &BroadcastScenario,
    d: &DistortionTuple,
    tau: &TauSchedule,
    h: f64,
) -> Result<Vec<f64>> {
    check_inputs(s, d, tau)?;
    let taus = tau.values();
    let mut probe = d.values().to_vec();
    let mut out = Vec::with_capacity(probe.len());
    for i in 0..probe.len() {
        let centre = probe[i];
        if h.is_nan() || h <= 0.0 || centre - h <= 0.0 || centre + h > s.source_var() {
            return Err(Error::StepOutOfDomain { index: i + 1, step: h });
        }
        probe[i] = centre + h;
        let up = eval_raw(s, &probe, &taus);
        probe[i] = centre - h;
        let down = eval_raw(s, &probe, &taus);
        probe[i] = centre;
        out.push((up - down) / (2.0 * h));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::tau_step_schedule;

    fn scn(b: f64) -> BroadcastScenario {
        BroadcastScenario::new(3.0, vec![3.0, 1.0], b, 1.0).unwrap()
    }

    fn dt(v: &[f64]) -> DistortionTuple {
        DistortionTuple::new(v.to_vec()).unwrap()
    }

    fn tau(v: &[f64]) -> TauSchedule {
        TauSchedule::from_values(v).unwrap()
    }

    #[test]
    fn hand_evaluated_matched_case() {
        let g = eval_g(&scn(1.0), &dt(&[0.5, 0.25]), &tau(&[1.0, 0.0])).unwrap();
        assert!((g - 6.0).abs() < 1e-12, "{g}");
    }

    #[test]
    fn hand_evaluated_expansion_case() {
        let g = eval_g(&scn(2.0), &dt(&[0.25, 0.0625]), &tau(&[1.0, 0.0])).unwrap();
        let expected = 2.0 * (2.0f64 / 1.25).sqrt() + (1.0625f64 / 0.078125).sqrt();
        assert!((g - expected).abs() < 1e-12);
        assert!((g - 6.2176).abs() < 1e-4);
    }

    #[test]
    fn zero_schedule_collapses_to_first_receiver() {
        for b in [0.3, 1.0, 2.5] {
            let d = dt(&[0.6, 0.2]);
            let g = eval_g(&scn(b), &d, &tau(&[0.0, 0.0])).unwrap();
            let expected = 3.0 * (1.0f64 / 0.6).powf(1.0 / b);
            assert!(((g - expected) / expected).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_path_rejects_infinity() {
        assert_eq!(
            eval_g(&scn(1.0), &dt(&[0.5, 0.25]), &tau(&[f64::INFINITY, 0.0])),
            Err(Error::NonFiniteTau)
        );
    }

    #[test]
    fn extended_two_receivers() {
        let s = scn(1.5);
        let d = dt(&[0.4, 0.3]);
        let g = eval_g_extended(&s, &d, &tau(&[f64::INFINITY, 0.0])).unwrap();
        let expected = 2.0 + (1.0f64 / 0.3).powf(1.0 / 1.5);
        assert!((g.value() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn extended_matches_finite_when_no_infinity() {
        let s = scn(0.7);
        let d = dt(&[0.4, 0.3]);
        let t = tau(&[2.0, 0.0]);
        assert_eq!(
            eval_g_extended(&s, &d, &t).unwrap().value(),
            eval_g(&s, &d, &t).unwrap()
        );
    }

    #[test]
    fn extended_three_receivers_step_schedule() {
        let s = BroadcastScenario::new(2.0, vec![4.0, 2.0, 0.5], 1.7, 1.0).unwrap();
        let d = dt(&[0.8, 0.5, 0.3]);
        let g = eval_g_extended(&s, &d, &tau_step_schedule(3, 2).unwrap()).unwrap();
        let expected = 2.0 + 2.0 * (1.0f64 / 0.5).powf(1.0 / 1.7);
        assert!((g.value() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn reduced_values() {
        let s = scn(1.0);
        let d = dt(&[0.5, 0.25]);
        assert!((reduced_bound_value(&s, &d, 2).unwrap() - 6.0).abs() < 1e-15);
        assert!((reduced_bound_value(&s, &d, 1).unwrap() - 6.0).abs() < 1e-15);
        let single = BroadcastScenario::new(1.0, vec![1.0], 1.0, 1.0).unwrap();
        assert_eq!(reduced_bound_value(&single, &dt(&[0.5]), 1).unwrap(), 2.0);
        assert!(reduced_bound_value(&s, &d, 3).is_err());
    }

    #[test]
    fn check_inequality_regimes() {
        let t = tau(&[1.0, 0.0]);
        for (b, sat) in [(1.0, true), (2.0, false), (0.5, true)] {
            let s = scn(b);
            let ev = check_inequality(&s, &s.trivial_point(), &t).unwrap();
            assert_eq!(ev.satisfied, sat, "b = {b}");
            assert_eq!(ev.satisfied, ev.slack >= 0.0);
            if b == 1.0 {
                assert_eq!(ev.slack, 0.0);
            }
        }
        let s = scn(0.5);
        let ev = check_inequality(&s, &s.trivial_point(), &t).unwrap();
        assert!((ev.lhs.value() - 5.8335).abs() < 1e-4);
    }

    #[test]
    fn partials_at_zero_schedule() {
        let b = 1.3;
        let s = scn(b);
        let d = dt(&[0.6, 0.4]);
        let p = finite_diff_partials(&s, &d, &tau(&[0.0, 0.0]), 1e-6).unwrap();
        assert_eq!(p[1], 0.0);
        let analytic = -(3.0 / b) * (1.0f64 / 0.6).powf(1.0 / b + 1.0);
        assert!(((p[0] - analytic) / analytic).abs() < 1e-4);
    }

    #[test]
    fn partials_step_must_stay_in_domain() {
        let s = scn(1.0);
        let d = dt(&[1.0, 0.4]);
        assert!(matches!(
            finite_diff_partials(&s, &d, &tau(&[0.0, 0.0]), 1e-3),
            Err(Error::StepOutOfDomain { index: 1, .. })
        ));
    }

    #[test]
    fn source_variance_is_a_scale() {
        // g(N_S, D, tau) == g(1, D / N_S, tau / N_S)
        let s2 = BroadcastScenario::new(3.0, vec![3.0, 1.0], 1.4, 2.0).unwrap();
        let s1 = scn(1.4);
        let a = eval_g(&s2, &dt(&[1.2, 0.6]), &tau(&[3.0, 0.0])).unwrap();
        let b = eval_g(&s1, &dt(&[0.6, 0.3]), &tau(&[1.5, 0.0])).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }
}
