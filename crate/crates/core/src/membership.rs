//! Membership in the outer-bound region.
//!
//! A tuple `D` belongs to the region when `g(D) <= P + N_1` for every
//! ordered schedule, so membership is decided by the supremum of `g` over
//! `0 = tau_K <= ... <= tau_1 <= +inf`. The search runs in compactified
//! coordinates `t = tau / (1 + tau)`, where the feasible set is the ordered
//! cube `1 >= t_1 >= ... >= t_{K-1} >= t_K = 0` and the step schedules are
//! grid corners. An exhaustive ordered grid picks the starting points, and
//! cyclic golden-section sweeps refine each of them.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{self, eval_raw, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::scenario::{compact_to_tau, BroadcastScenario, DistortionTuple, TauSchedule};

/// Bisection stops once the bracket is narrower than this.
pub const BOUNDARY_WIDTH: f64 = 1e-10;

/// Knobs for [`sup_g_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct SupOptions {
    /// Grid points per axis minus one; `None` picks by `K`.
    pub resolution: Option<usize>,
    /// Number of best grid points refined.
    pub starts: usize,
    /// A refinement sweep whose largest coordinate move is below this ends
    /// the search from that start.
    pub coord_tol: f64,
    pub max_cycles: usize,
}

impl Default for SupOptions {
    fn default() -> Self {
        SupOptions {
            resolution: None,
            starts: 5,
            coord_tol: 1e-10,
            max_cycles: 200,
        }
    }
}

impl SupOptions {
    pub fn with_resolution(resolution: usize) -> Self {
        SupOptions {
            resolution: Some(resolution),
            ..Self::default()
        }
    }
}

/// Default grid resolution for `K` receivers.
pub fn default_resolution(receivers: usize) -> usize {
    match receivers {
        0..=3 => 64,
        4..=5 => 16,
        _ => 6,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupResult {
    pub sup_value: f64,
    pub argmax_tau: TauSchedule,
    /// `argmax_tau` in compactified coordinates.
    pub argmax_compact: Vec<f64>,
    /// Best value on the grid before refinement.
    pub grid_value: f64,
    pub resolution: usize,
    /// Refinement sweeps, summed over all starts.
    pub iterations: usize,
    pub evaluations: usize,
    /// Estimated bound on how far the true supremum can exceed `sup_value`,
    /// from the steepest neighbour slope seen on the grid.
    pub certified_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub member: bool,
    pub sup: SupResult,
    /// `P + N_1 - sup g`.
    pub margin: f64,
}

/// `g` as a function of the free compactified coordinates `t_1..t_{K-1}`.
struct Objective<'a> {
    scenario: &'a BroadcastScenario,
    d: &'a [f64],
}

impl Objective<'_> {
    fn eval(&self, t: &[f64], taus: &mut Vec<f64>) -> f64 {
        taus.clear();
        taus.extend(t.iter().map(|&x| compact_to_tau(x)));
        taus.push(0.0);
        eval_raw(self.scenario, self.d, taus)
    }
}

fn ordered_grid(dims: usize, resolution: usize) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, dims: usize, upper: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dims {
            out.push(prefix.clone());
            return;
        }
        for i in 0..=upper {
            prefix.push(i);
            rec(prefix, dims, i, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(dims), dims, resolution as u32, &mut out);
    out
}

fn grid_key(idx: &[u32], radix: u64) -> u64 {
    idx.iter().fold(0u64, |acc, &i| acc * radix + i as u64)
}

/// Maximises `f` on `[lo, hi]` by golden-section search.
fn golden_max(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64, usize) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
    }
    // the maximiser may sit on the bracket edge
    let (fl, fh) = (f(lo), f(hi));
    evals += 2;
    [(x1, f1), (x2, f2), (lo, fl), (hi, fh)]
        .into_iter()
        .fold((x1, f1, evals), |best, (x, fx)| {
            if fx > best.1 {
                (x, fx, evals)
            } else {
                best
            }
        })
}

/// Supremum of `g` over all ordered schedules with default options.
pub fn sup_g(s: &BroadcastScenario, d: &DistortionTuple) -> Result<SupResult> {
    sup_g_with(s, d, &SupOptions::default())
}

pub fn sup_g_with(s: &BroadcastScenario, d: &DistortionTuple, opts: &SupOptions) -> Result<SupResult> {
    s.check_distortions(d)?;
    let k = s.receivers();
    let dims = k - 1;
    let resolution = opts.resolution.unwrap_or_else(|| default_resolution(k)).max(1);
    let obj = Objective { scenario: s, d: d.values() };
    let mut scratch = Vec::with_capacity(k);

    if dims == 0 {
        let v = obj.eval(&[], &mut scratch);
        return Ok(SupResult {
            sup_value: v,
            argmax_tau: TauSchedule::zeros(1),
            argmax_compact: vec![0.0],
            grid_value: v,
            resolution,
            iterations: 0,
            evaluations: 1,
            certified_gap: 0.0,
        });
    }

    let h = 1.0 / resolution as f64;
    let grid = ordered_grid(dims, resolution);
    let values: Vec<f64> = grid
        .par_iter()
        .map_init(
            || Vec::with_capacity(k),
            |buf, idx| {
                let t: Vec<f64> = idx.iter().map(|&i| i as f64 * h).collect();
                obj.eval(&t, buf)
            },
        )
        .collect();
    let mut evaluations = grid.len();

    // steepest slope between grid neighbours along any axis
    let radix = resolution as u64 + 1;
    let lookup: HashMap<u64, f64> = grid
        .iter()
        .zip(&values)
        .map(|(idx, &v)| (grid_key(idx, radix), v))
        .collect();
    let mut slope = 0.0f64;
    let mut nb = vec![0u32; dims];
    for (idx, &v) in grid.iter().zip(&values) {
        for axis in 0..dims {
            nb.copy_from_slice(idx);
            nb[axis] += 1;
            if let Some(&w) = lookup.get(&grid_key(&nb, radix)) {
                if v.is_finite() && w.is_finite() {
                    slope = slope.max((w - v).abs() / h);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let grid_value = values[order[0]];

    let mut best_t: Vec<f64> = grid[order[0]].iter().map(|&i| i as f64 * h).collect();
    let mut best_v = grid_value;
    let mut iterations = 0;

    for &start in order.iter().take(opts.starts.max(1)) {
        let mut t: Vec<f64> = grid[start].iter().map(|&i| i as f64 * h).collect();
        let mut fv = values[start];
        for _ in 0..opts.max_cycles {
            iterations += 1;
            let mut max_move = 0.0f64;
            for i in 0..dims {
                let lo = if i + 1 < dims { t[i + 1] } else { 0.0 };
                let hi = if i == 0 { 1.0 } else { t[i - 1] };
                let a = lo.max(t[i] - h);
                let c = hi.min(t[i] + h);
                if c <= a {
                    continue;
                }
                let mut probe = t.clone();
                let (x, fx, n) = golden_max(
                    |x| {
                        probe[i] = x;
                        obj.eval(&probe, &mut scratch)
                    },
                    a,
                    c,
                    1e-12,
                );
                evaluations += n;
                if fx > fv {
                    max_move = max_move.max((x - t[i]).abs());
                    t[i] = x;
                    fv = fx;
                }
            }
            if max_move < opts.coord_tol {
                break;
            }
        }
        if fv > best_v {
            best_v = fv;
            best_t = t;
        }
    }

    let mut compact = best_t.clone();
    compact.push(0.0);
    let argmax_tau = TauSchedule::from_compact(&compact)?;
    let bound_estimate = grid_value + slope * h * dims as f64 / 2.0;
    Ok(SupResult {
        sup_value: best_v,
        argmax_tau,
        argmax_compact: compact,
        grid_value,
        resolution,
        iterations,
        evaluations,
        certified_gap: (bound_estimate - best_v).max(0.0),
    })
}

/// Outer-region membership with default tolerance and search options.
pub fn in_outer_region(s: &BroadcastScenario, d: &DistortionTuple) -> Result<MembershipVerdict> {
    in_outer_region_with(s, d, DEFAULT_TOLERANCE, &SupOptions::default())
}

/// `member` iff `sup g <= (P + N_1)(1 + tol)`.
pub fn in_outer_region_with(
    s: &BroadcastScenario,
    d: &DistortionTuple,
    tol: f64,
    opts: &SupOptions,
) -> Result<MembershipVerdict> {
    let sup = sup_g_with(s, d, opts)?;
    let rhs = s.rhs();
    let margin = rhs - sup.sup_value;
    Ok(MembershipVerdict {
        member: margin >= -tol * rhs,
        sup,
        margin,
    })
}

/// One point of a traced boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub fixed: Vec<f64>,
    pub last_min: f64,
    pub sup_value: f64,
    pub margin: f64,
}

/// Smallest `D_K` in `range` for which `(fixed.., D_K)` is a member.
pub fn trace_boundary(s: &BroadcastScenario, fixed: &[f64], range: (f64, f64)) -> Result<f64> {
    trace_boundary_row(s, fixed, range, DEFAULT_TOLERANCE, &SupOptions::default()).map(|r| r.last_min)
}

/// Bisection on `D_K` over `range = (lower, upper)`. Feasibility is monotone
/// in `D_K` because `g` is nonincreasing in every distortion.
pub fn trace_boundary_row(
    s: &BroadcastScenario,
    fixed: &[f64],
    range: (f64, f64),
    tol: f64,
    opts: &SupOptions,
) -> Result<BoundaryRow> {
    let k = s.receivers();
    if fixed.len() + 1 != k {
        return Err(Error::DimensionMismatch {
            expected: k - 1,
            actual: fixed.len(),
        });
    }
    let (mut lo, mut hi) = range;
    if !(lo > 0.0 && lo <= hi && hi <= s.source_var()) {
        return Err(Error::InvalidDistortion {
            index: k,
            value: if lo > 0.0 { hi } else { lo },
            source_var: s.source_var(),
        });
    }
    let probe = |last: f64| -> Result<MembershipVerdict> {
        let mut v = fixed.to_vec();
        v.push(last);
        in_outer_region_with(s, &DistortionTuple::new(v)?, tol, opts)
    };
    let mut at_hi = probe(hi)?;
    if !at_hi.member {
        return Err(Error::InfeasibleEverywhere { upper: hi });
    }
    let at_lo = probe(lo)?;
    if at_lo.member {
        hi = lo;
        at_hi = at_lo;
    }
    while hi - lo > BOUNDARY_WIDTH {
        let mid = 0.5 * (lo + hi);
        let v = probe(mid)?;
        if v.member {
            hi = mid;
            at_hi = v;
        } else {
            lo = mid;
        }
    }
    Ok(BoundaryRow {
        fixed: fixed.to_vec(),
        last_min: hi,
        sup_value: at_hi.sup.sup_value,
        margin: at_hi.margin,
    })
}

/// Writes rows as CSV: `D1,..,D{K-1},D{K}_min,sup_value,margin`.
pub fn write_boundary_csv<W: Write>(rows: &[BoundaryRow], receivers: usize, mut w: W) -> io::Result<()> {
    let mut header: Vec<String> = (1..receivers).map(|j| format!("D{j}")).collect();
    header.push(format!("D{receivers}_min"));
    header.push("sup_value".into());
    header.push("margin".into());
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut cells: Vec<String> = r.fixed.iter().map(|v| v.to_string()).collect();
        cells.push(r.last_min.to_string());
        cells.push(r.sup_value.to_string());
        cells.push(r.margin.to_string());
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// How the outer bound relates to the point-to-point bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Trivial point strictly inside every inequality with a free schedule.
    Degenerate,
    /// Trivial point on every inequality.
    Equal,
    /// Trivial point excluded.
    StrictlyTighter,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Degenerate => "Degenerate",
            Regime::Equal => "Equal",
            Regime::StrictlyTighter => "StrictlyTighter",
        };
        f.write_str(s)
    }
}

/// Regime predicted from `b` and `K` alone.
pub fn analytic_regime(s: &BroadcastScenario) -> Regime {
    let b = s.bandwidth();
    if s.receivers() == 1 || b == 1.0 {
        Regime::Equal
    } else if b < 1.0 {
        Regime::Degenerate
    } else {
        Regime::StrictlyTighter
    }
}

/// Classifies numerically at and around the trivial point, then checks the
/// answer against [`analytic_regime`].
pub fn classify_vs_trivial(s: &BroadcastScenario) -> Result<Regime> {
    let analytic = analytic_regime(s);
    let mismatch = |empirical: &str| Error::ClassificationMismatch {
        empirical: empirical.to_string(),
        analytic: analytic.to_string(),
    };
    let star = s.trivial_point();
    let at_star = in_outer_region(s, &star)?;

    // pushing any receiver below its point-to-point limit must leave the region
    for i in 0..s.receivers() {
        let mut v = star.values().to_vec();
        v[i] *= 1.0 - 1e-3;
        if in_outer_region(s, &DistortionTuple::new(v)?)?.member {
            return Err(mismatch("region extends below the trivial bound"));
        }
    }

    let empirical = if !at_star.member {
        Regime::StrictlyTighter
    } else if s.receivers() == 1 {
        Regime::Equal
    } else {
        let k = s.receivers();
        let mut widest = 0.0f64;
        for level in [0.1, 1.0, 10.0] {
            let mut taus = vec![level; k];
            taus[k - 1] = 0.0;
            let ev = bound::check_inequality(s, &star, &TauSchedule::from_values(&taus)?)?;
            if ev.slack.abs() > widest.abs() {
                widest = ev.slack;
            }
        }
        if widest > 0.0 {
            Regime::Degenerate
        } else if widest == 0.0 {
            Regime::Equal
        } else {
            return Err(mismatch("member at the trivial point with a violated inequality"));
        }
    };
    if empirical != analytic {
        return Err(mismatch(&empirical.to_string()));
    }
    Ok(empirical)
}
