//! Capacity regions of degraded Gaussian broadcast channels.
//!
//! Rates are in bits per source sample: a channel used `b` times per source
//! sample supports `R_k = (b/2) log2((beta_{k-1} + N_k) / (beta_k + N_k))`
//! where `beta_k` is the power left for the layers of receivers `k+1..K`.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::BroadcastScenario;

/// Rate slack, in bits, granted to sampled points in containment tests.
pub const CONTAINMENT_SLACK_BITS: f64 = 1e-7;

/// Default number of dominant-face samples.
pub const DEFAULT_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianBC {
    power: f64,
    noises: Vec<f64>,
}

impl GaussianBC {
    pub fn new(power: f64, noises: Vec<f64>) -> Result<Self> {
        // reuse the scenario checks; bandwidth is irrelevant here
        let s = BroadcastScenario::new(power, noises, 1.0, 1.0)?;
        Ok(GaussianBC {
            power: s.power(),
            noises: s.noises().to_vec(),
        })
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn noises(&self) -> &[f64] {
        &self.noises
    }

    pub fn receivers(&self) -> usize {
        self.noises.len()
    }
}

impl From<&BroadcastScenario> for GaussianBC {
    fn from(s: &BroadcastScenario) -> Self {
        GaussianBC {
            power: s.power(),
            noises: s.noises().to_vec(),
        }
    }
}

/// Per-receiver rates in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RatePoint {
    rates: Vec<f64>,
}

impl RatePoint {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidExtReal(*r));
        }
        Ok(RatePoint { rates })
    }

    pub fn zeros(k: usize) -> Self {
        RatePoint { rates: vec![0.0; k] }
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }
}

fn check_split(ch: &GaussianBC, split: &[f64]) -> Result<()> {
    if split.len() != ch.receivers() {
        return Err(Error::InvalidSplit(format!(
            "{} shares for {} receivers",
            split.len(),
            ch.receivers()
        )));
    }
    if split.iter().any(|a| a.is_nan() || *a < 0.0) {
        return Err(Error::InvalidSplit("negative or NaN share".into()));
    }
    let total: f64 = split.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSplit(format!("shares sum to {total}")));
    }
    Ok(())
}

/// Dominant-face rate point for power shares `split` (share `k` goes to the
/// layer decoded by receiver `k`).
pub fn boundary_rates(ch: &GaussianBC, split: &[f64], b: f64) -> Result<RatePoint> {
    check_split(ch, split)?;
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::NonPositiveParameter { name: "bandwidth", value: b });
    }
    let k = ch.receivers();
    let mut above = ch.power;
    let mut rates = Vec::with_capacity(k);
    for i in 0..k {
        let below = ch.power * split[i + 1..].iter().sum::<f64>();
        let n = ch.noises[i];
        rates.push(0.5 * b * ((above + n) / (below + n)).log2());
        above = below;
    }
    Ok(RatePoint { rates })
}

/// Residual power after peeling off every layer greedily, or the first
/// negative residual. Nonnegative iff `r` is achievable.
pub fn residual_power(ch: &GaussianBC, r: &RatePoint, b: f64) -> f64 {
    let mut beta = ch.power;
    for (&n, &rate) in ch.noises.iter().zip(&r.rates) {
        beta = (beta + n) * (-2.0 * rate / b).exp2() - n;
        if beta < 0.0 {
            return beta;
        }
    }
    beta
}

/// Whether `r` lies in the region of `ch` used `b` times per sample, with a
/// residual-power tolerance of `1e-9 P`.
pub fn rate_membership(ch: &GaussianBC, r: &RatePoint, b: f64) -> bool {
    rate_membership_with(ch, r, b, 1e-9 * ch.power)
}

pub fn rate_membership_with(ch: &GaussianBC, r: &RatePoint, b: f64, tol: f64) -> bool {
    r.len() == ch.receivers() && residual_power(ch, r, b) >= -tol
}

/// Virtual channel of a source of variance `source_var` reconstructed with
/// distortions `D`: power `N_S`, noises `N_S D_k / (N_S - D_k)`.
pub fn virtual_channel(source_var: f64, d: &[f64]) -> Result<GaussianBC> {
    if !(source_var > 0.0 && source_var.is_finite()) {
        return Err(Error::NonPositiveParameter {
            name: "source_var",
            value: source_var,
        });
    }
    for (i, &v) in d.iter().enumerate() {
        if v == source_var {
            return Err(Error::DistortionAtSourceVariance { index: i + 1 });
        }
        if !(v > 0.0 && v < source_var) {
            return Err(Error::InvalidDistortion {
                index: i + 1,
                value: v,
                source_var,
            });
        }
    }
    for (i, w) in d.windows(2).enumerate() {
        if w[1] >= w[0] {
            return Err(Error::NonStrictOrdering {
                index: i + 2,
                prev: w[0],
                value: w[1],
            });
        }
    }
    let noises = d.iter().map(|&v| source_var * v / (source_var - v)).collect();
    GaussianBC::new(source_var, noises)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Containment {
    Contained,
    NotContained { witness: RatePoint },
}

impl Containment {
    pub fn is_contained(&self) -> bool {
        matches!(self, Containment::Contained)
    }
}

/// Power splits covering the simplex: an even grid for two receivers, all
/// compositions of the largest fitting resolution otherwise.
pub fn split_grid(receivers: usize, samples: usize) -> Vec<Vec<f64>> {
    match receivers {
        0 => Vec::new(),
        1 => vec![vec![1.0]],
        2 => {
            let n = samples.max(2);
            (0..n)
                .map(|i| {
                    let a = i as f64 / (n - 1) as f64;
                    vec![1.0 - a, a]
                })
                .collect()
        }
        k => {
            let count = |r: usize| -> usize {
                // C(r + k - 1, k - 1)
                (1..k).fold(1usize, |acc, j| acc * (r + j) / j)
            };
            let mut r = 1;
            while count(r + 1) <= samples {
                r += 1;
            }
            let mut out = Vec::new();
            let mut parts = vec![0usize; k];
            compositions(r, 0, &mut parts, &mut out);
            out.into_iter()
                .map(|p| p.into_iter().map(|c| c as f64 / r as f64).collect())
                .collect()
        }
    }
}

fn compositions(left: usize, pos: usize, parts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == parts.len() {
        parts[pos] = left;
        out.push(parts.clone());
        return;
    }
    for c in 0..=left {
        parts[pos] = c;
        compositions(left - c, pos + 1, parts, out);
    }
}

/// Samples the dominant face of `(inner, b_inner)` and tests every point
/// against `(outer, b_outer)`, each rate lowered by
/// [`CONTAINMENT_SLACK_BITS`].
pub fn containment(
    inner: &GaussianBC,
    b_inner: f64,
    outer: &GaussianBC,
    b_outer: f64,
    samples: usize,
) -> Result<Containment> {
    if inner.receivers() != outer.receivers() {
        return Err(Error::DimensionMismatch {
            expected: outer.receivers(),
            actual: inner.receivers(),
        });
    }
    for split in split_grid(inner.receivers(), samples) {
        let r = boundary_rates(inner, &split, b_inner)?;
        let relaxed = RatePoint {
            rates: r.rates.iter().map(|x| (x - CONTAINMENT_SLACK_BITS).max(0.0)).collect(),
        };
        if !rate_membership_with(outer, &relaxed, b_outer, 0.0) {
            return Ok(Containment::NotContained { witness: r });
        }
    }
    Ok(Containment::Contained)
}

/// Two-receiver scenario with unit power whose point-to-point capacities at
/// bandwidth `b` are `c1 < c2` bits.
pub fn scenario_from_capacities(c1: f64, c2: f64, b: f64) -> Result<BroadcastScenario> {
    if !(c1 > 0.0 && c2 > c1 && c2.is_finite()) {
        return Err(Error::InvalidCapacities { c1, c2 });
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::NonPositiveParameter { name: "bandwidth", value: b });
    }
    let noise = |c: f64| 1.0 / ((2.0 * c / b).exp2() - 1.0);
    BroadcastScenario::new(1.0, vec![noise(c1), noise(c2)], b, 1.0)
}

/// Two-receiver rates with the second bound's denominator taken as `N_1`
/// instead of `N_2`. Not a capacity region; for comparison only.
pub fn caption_literal_rates(ch: &GaussianBC, alpha: f64, b: f64) -> Result<(f64, f64)> {
    if ch.receivers() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: ch.receivers(),
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidSplit(format!("alpha = {alpha}")));
    }
    let (p, n1, n2) = (ch.power, ch.noises[0], ch.noises[1]);
    let r1 = 0.5 * b * ((p + n1) / (alpha * p + n1)).log2();
    let r2 = 0.5 * b * ((alpha * p + n2) / n1).log2();
    Ok((r1, r2))
}

/// One sampled boundary point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSample {
    pub split: Vec<f64>,
    pub rates: Vec<f64>,
}

pub fn region_samples(ch: &GaussianBC, b: f64, samples: usize) -> Result<Vec<RegionSample>> {
    split_grid(ch.receivers(), samples)
        .into_iter()
        .map(|split| {
            let r = boundary_rates(ch, &split, b)?;
            Ok(RegionSample { split, rates: r.rates })
        })
        .collect()
}

/// CSV with `alpha,R1,R2` for two receivers (`alpha` is the share of
/// receiver 2) and `a1..aK,R1..RK` otherwise.
pub fn write_region_csv<W: Write>(samples: &[RegionSample], receivers: usize, mut w: W) -> io::Result<()> {
    let mut header: Vec<String> = if receivers == 2 {
        vec!["alpha".into()]
    } else {
        (1..=receivers).map(|k| format!("a{k}")).collect()
    };
    header.extend((1..=receivers).map(|k| format!("R{k}")));
    writeln!(w, "{}", header.join(","))?;
    for s in samples {
        let mut cells: Vec<String> = if receivers == 2 {
            vec![s.split[1].to_string()]
        } else {
            s.split.iter().map(|v| v.to_string()).collect()
        };
        cells.extend(s.rates.iter().map(|v| v.to_string()));
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch() -> GaussianBC {
        GaussianBC::new(3.0, vec![3.0, 1.0]).unwrap()
    }

    #[test]
    fn two_user_corners_and_interior() {
        let r = boundary_rates(&ch(), &[1.0, 0.0], 1.0).unwrap();
        assert_eq!(r.rates(), &[0.5 * 2f64.log2(), 0.0]);
        let r = boundary_rates(&ch(), &[0.0, 1.0], 2.0).unwrap();
        assert_eq!(r.rates()[0], 0.0);
        assert!((r.rates()[1] - 4f64.log2()).abs() < 1e-15);
        let r = boundary_rates(&ch(), &[2.0 / 3.0, 1.0 / 3.0], 1.0).unwrap();
        assert!((r.rates()[0] - 0.5 * (6.0f64 / 4.0).log2()).abs() < 1e-12);
        assert!((r.rates()[0] - 0.29248).abs() < 1e-5);
        assert!((r.rates()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_splits() {
        assert!(boundary_rates(&ch(), &[0.5, 0.6], 1.0).is_err());
        assert!(boundary_rates(&ch(), &[1.5, -0.5], 1.0).is_err());
        assert!(boundary_rates(&ch(), &[1.0], 1.0).is_err());
    }

    #[test]
    fn membership_round_trip_and_scaling() {
        let c = ch();
        for i in 0..=20 {
            let a = i as f64 / 20.0;
            let r = boundary_rates(&c, &[1.0 - a, a], 1.5).unwrap();
            assert!(rate_membership(&c, &r, 1.5));
            assert!(residual_power(&c, &r, 1.5).abs() < 1e-9);
            let grown = RatePoint::new(r.rates().iter().map(|x| x * 1.01).collect()).unwrap();
            assert!(!rate_membership(&c, &grown, 1.5));
        }
        assert!(rate_membership(&c, &RatePoint::zeros(2), 1.0));
    }

    #[test]
    fn virtual_channel_noises() {
        let v = virtual_channel(1.0, &[0.5, 0.25]).unwrap();
        assert_eq!(v.power(), 1.0);
        assert!((v.noises()[0] - 1.0).abs() < 1e-15);
        assert!((v.noises()[1] - 1.0 / 3.0).abs() < 1e-15);
        let v = virtual_channel(2.0, &[1.0, 0.5]).unwrap();
        assert_eq!(v.noises()[0], 2.0);
        assert!((v.noises()[1] - 2.0 / 3.0).abs() < 1e-15);
        let v = virtual_channel(1.0, &[1e-12]).unwrap();
        assert!(v.noises()[0] < 1e-11);
        assert_eq!(
            virtual_channel(1.0, &[1.0, 0.5]),
            Err(Error::DistortionAtSourceVariance { index: 1 })
        );
        assert!(matches!(
            virtual_channel(1.0, &[0.5, 0.5]),
            Err(Error::NonStrictOrdering { index: 2, .. })
        ));
    }

    #[test]
    fn containment_examples() {
        let c = ch();
        assert!(containment(&c, 1.0, &c, 1.0, 512).unwrap().is_contained());

        let s = BroadcastScenario::new(3.0, vec![3.0, 1.0], 1.0, 1.0).unwrap();
        let v = virtual_channel(1.0, s.trivial_point().values()).unwrap();
        assert!(containment(&v, 1.0, &c, 1.0, 512).unwrap().is_contained());
        assert!(containment(&c, 1.0, &v, 1.0, 512).unwrap().is_contained());

        let s = s.with_bandwidth(2.0).unwrap();
        let v = virtual_channel(1.0, s.trivial_point().values()).unwrap();
        match containment(&v, 1.0, &c, 2.0, 512).unwrap() {
            Containment::NotContained { witness } => assert!(!rate_membership(&c, &witness, 2.0)),
            Containment::Contained => panic!("virtual region should exceed the physical one"),
        }

        let three = GaussianBC::new(1.0, vec![3.0, 2.0, 1.0]).unwrap();
        assert!(containment(&three, 1.0, &c, 1.0, 64).is_err());
    }

    #[test]
    fn capacities_to_noises() {
        let s = scenario_from_capacities(1.0, 5.0, 1.0).unwrap();
        assert!((s.noises()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.noises()[1] - 1.0 / 1023.0).abs() < 1e-15);
        let s = scenario_from_capacities(1.0, 5.0, 2.0).unwrap();
        assert_eq!(s.noises(), &[1.0, 1.0 / 31.0]);
        let s = scenario_from_capacities(1.5, 5.0, 3.0).unwrap();
        assert_eq!(s.noises()[0], 1.0);
        assert!(scenario_from_capacities(5.0, 1.0, 1.0).is_err());
        assert!(scenario_from_capacities(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn split_grid_shapes() {
        assert_eq!(split_grid(2, 512).len(), 512);
        let g = split_grid(3, 512);
        assert!(g.len() <= 512 && g.len() > 400);
        for s in &g {
            assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn caption_literal_differs_only_in_second_rate() {
        let c = ch();
        let (r1, r2) = caption_literal_rates(&c, 0.5, 1.0).unwrap();
        let r = boundary_rates(&c, &[0.5, 0.5], 1.0).unwrap();
        assert_eq!(r1, r.rates()[0]);
        assert!((r2 - 0.5 * (2.5f64 / 3.0).log2()).abs() < 1e-15);
    }

    #[test]
    fn region_csv_layout() {
        let samples = region_samples(&ch(), 1.0, 2).unwrap();
        let mut out = Vec::new();
        write_region_csv(&samples, 2, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("alpha,R1,R2"));
        assert_eq!(lines.next(), Some("0,0.5,0"));
        assert_eq!(lines.next(), Some("1,0,1"));
    }
}
