//! Broadcast scenarios, distortion tuples, tau schedules and the
//! point-to-point (trivial) distortion limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;

fn default_source_var() -> f64 {
    1.0
}

/// Unvalidated scenario as read from a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawScenario {
    pub power: f64,
    pub noises: Vec<f64>,
    pub bandwidth: f64,
    #[serde(default = "default_source_var")]
    pub source_var: f64,
}

/// A Gaussian source of variance `N_S` sent over a `K`-receiver Gaussian
/// broadcast channel with input power `P`, noise variances
/// `N_1 > N_2 > ... > N_K > 0` and `b` channel uses per source sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "RawScenario")]
pub struct BroadcastScenario {
    power: f64,
    noises: Vec<f64>,
    bandwidth: f64,
    source_var: f64,
}

impl From<BroadcastScenario> for RawScenario {
    fn from(s: BroadcastScenario) -> Self {
        RawScenario {
            power: s.power,
            noises: s.noises,
            bandwidth: s.bandwidth,
            source_var: s.source_var,
        }
    }
}

impl<'de> Deserialize<'de> for BroadcastScenario {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawScenario::deserialize(d)?;
        validate_scenario(raw).map_err(serde::de::Error::custom)
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveParameter { name, value })
    }
}

/// Validates a raw scenario. No normalisation is applied: `source_var` is
/// carried as given and all distortions are absolute.
pub fn validate_scenario(raw: RawScenario) -> Result<BroadcastScenario> {
    positive("power", raw.power)?;
    positive("bandwidth", raw.bandwidth)?;
    positive("source_var", raw.source_var)?;
    if raw.noises.is_empty() {
        return Err(Error::NoReceivers);
    }
    for &n in &raw.noises {
        positive("noise", n)?;
    }
    for (i, w) in raw.noises.windows(2).enumerate() {
        if w[1] >= w[0] {
            return Err(Error::NonDecreasingNoises {
                index: i + 1,
                prev: w[0],
                value: w[1],
            });
        }
    }
    Ok(BroadcastScenario {
        power: raw.power,
        noises: raw.noises,
        bandwidth: raw.bandwidth,
        source_var: raw.source_var,
    })
}

impl BroadcastScenario {
    pub fn new(power: f64, noises: Vec<f64>, bandwidth: f64, source_var: f64) -> Result<Self> {
        validate_scenario(RawScenario {
            power,
            noises,
            bandwidth,
            source_var,
        })
    }

    /// Same channel and source, different bandwidth factor.
    pub fn with_bandwidth(&self, bandwidth: f64) -> Result<Self> {
        Self::new(self.power, self.noises.clone(), bandwidth, self.source_var)
    }

    /// Multiplies the power and every noise variance by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        positive("scale", c)?;
        Self::new(
            self.power * c,
            self.noises.iter().map(|n| n * c).collect(),
            self.bandwidth,
            self.source_var,
        )
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn noises(&self) -> &[f64] {
        &self.noises
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn source_var(&self) -> f64 {
        self.source_var
    }

    /// Number of receivers `K`.
    pub fn receivers(&self) -> usize {
        self.noises.len()
    }

    /// `P + N_1`, the right-hand side of the outer-bound inequality.
    pub fn rhs(&self) -> f64 {
        self.power + self.noises[0]
    }

    /// `N_k - N_{k+1}` (0-based `i`), with `N_{K+1} = 0`.
    pub fn delta_noise(&self, i: usize) -> f64 {
        let next = self.noises.get(i + 1).copied().unwrap_or(0.0);
        self.noises[i] - next
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.receivers() {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: self.receivers(),
            });
        }
        Ok(())
    }

    /// Point-to-point optimum for receiver `k` (1-based):
    /// `D_k* = N_S (N_k / (P + N_k))^b`.
    pub fn trivial_distortion(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        let n = self.noises[k - 1];
        Ok(self.source_var * (n / (self.power + n)).powf(self.bandwidth))
    }

    /// All `K` point-to-point optima as a distortion tuple.
    pub fn trivial_point(&self) -> DistortionTuple {
        let values = (1..=self.receivers())
            .map(|k| self.trivial_distortion(k).expect("index in range"))
            .collect();
        DistortionTuple { values }
    }

    /// Checks that `d` has `K` entries, all in `(0, N_S]`.
    pub fn check_distortions(&self, d: &DistortionTuple) -> Result<()> {
        if d.len() != self.receivers() {
            return Err(Error::DimensionMismatch {
                expected: self.receivers(),
                actual: d.len(),
            });
        }
        for (i, &v) in d.values().iter().enumerate() {
            if !(v > 0.0 && v <= self.source_var) {
                return Err(Error::InvalidDistortion {
                    index: i + 1,
                    value: v,
                    source_var: self.source_var,
                });
            }
        }
        Ok(())
    }

    pub fn check_schedule(&self, tau: &TauSchedule) -> Result<()> {
        if tau.len() != self.receivers() {
            return Err(Error::DimensionMismatch {
                expected: self.receivers(),
                actual: tau.len(),
            });
        }
        Ok(())
    }
}

/// Free-standing form of [`BroadcastScenario::trivial_distortion`].
pub fn trivial_distortion(scenario: &BroadcastScenario, k: usize) -> Result<f64> {
    scenario.trivial_distortion(k)
}

/// Per-receiver mean squared errors `D_1..D_K`.
///
/// Construction only checks `D_k > 0` and finiteness; the upper limit
/// `D_k <= N_S` depends on the scenario and is checked by
/// [`BroadcastScenario::check_distortions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistortionTuple {
    values: Vec<f64>,
}

impl DistortionTuple {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoReceivers);
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidDistortion {
                    index: i + 1,
                    value: v,
                    source_var: f64::NAN,
                });
            }
        }
        Ok(DistortionTuple { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Ordered schedule `0 = tau_K <= ... <= tau_1 <= +inf`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TauSchedule {
    taus: Vec<ExtReal>,
}

impl<'de> Deserialize<'de> for TauSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let taus = Vec::<ExtReal>::deserialize(d)?;
        TauSchedule::new(taus).map_err(serde::de::Error::custom)
    }
}

impl TauSchedule {
    pub fn new(taus: Vec<ExtReal>) -> Result<Self> {
        let last = *taus.last().ok_or(Error::NoReceivers)?;
        for (i, w) in taus.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(Error::NonMonotoneTau {
                    index: i + 2,
                    prev: w[0].value(),
                    value: w[1].value(),
                });
            }
        }
        if last != ExtReal::ZERO {
            return Err(Error::LastTauNonZero(last.value()));
        }
        Ok(TauSchedule { taus })
    }

    /// Builds a schedule from raw values; `f64::INFINITY` stands for `+inf`.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let taus = values
            .iter()
            .map(|&v| ExtReal::new(v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(taus)
    }

    /// All-zero schedule of length `k`.
    pub fn zeros(k: usize) -> Self {
        TauSchedule {
            taus: vec![ExtReal::ZERO; k],
        }
    }

    /// Builds a schedule from compactified coordinates `t = tau / (1 + tau)`
    /// in `[0, 1]`; `t = 1` maps to `+inf`.
    pub fn from_compact(t: &[f64]) -> Result<Self> {
        let values: Vec<f64> = t.iter().map(|&t| compact_to_tau(t)).collect();
        Self::from_values(&values)
    }

    pub fn taus(&self) -> &[ExtReal] {
        &self.taus
    }

    /// Raw values with `+inf` as `f64::INFINITY`.
    pub fn values(&self) -> Vec<f64> {
        self.taus.iter().map(|t| t.value()).collect()
    }

    /// Compactified coordinates `t_k = tau_k / (1 + tau_k)`.
    pub fn compact(&self) -> Vec<f64> {
        self.taus.iter().map(|t| tau_to_compact(t.value())).collect()
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.taus.iter().all(|t| t.is_finite())
    }
}

pub(crate) fn compact_to_tau(t: f64) -> f64 {
    if t >= 1.0 {
        f64::INFINITY
    } else {
        t / (1.0 - t)
    }
}

pub(crate) fn tau_to_compact(tau: f64) -> f64 {
    if tau.is_infinite() {
        1.0
    } else {
        tau / (1.0 + tau)
    }
}

/// Step schedule of length `receivers` with `tau_K..tau_k = 0` and
/// `tau_{k-1}..tau_1 = +inf` (`k` is 1-based).
pub fn tau_step_schedule(receivers: usize, k: usize) -> Result<TauSchedule> {
    if k == 0 || k > receivers {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: receivers,
        });
    }
    let taus = (1..=receivers)
        .map(|j| if j < k { ExtReal::INFINITY } else { ExtReal::ZERO })
        .collect();
    TauSchedule::new(taus)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scn(b: f64) -> BroadcastScenario {
        BroadcastScenario::new(3.0, vec![3.0, 1.0], b, 1.0).unwrap()
    }

    #[test]
    fn validates_scenarios() {
        assert!(BroadcastScenario::new(3.0, vec![3.0, 1.0], 1.0, 1.0).is_ok());
        assert!(matches!(
            BroadcastScenario::new(3.0, vec![1.0, 3.0], 1.0, 1.0),
            Err(Error::NonDecreasingNoises { .. })
        ));
        assert!(matches!(
            BroadcastScenario::new(3.0, vec![2.0, 2.0], 1.0, 1.0),
            Err(Error::NonDecreasingNoises { .. })
        ));
        assert!(matches!(
            BroadcastScenario::new(0.0, vec![1.0], 1.0, 1.0),
            Err(Error::NonPositiveParameter { name: "power", .. })
        ));
        assert!(matches!(
            BroadcastScenario::new(1.0, vec![1.0], -1.0, 1.0),
            Err(Error::NonPositiveParameter { name: "bandwidth", .. })
        ));
        assert!(matches!(
            BroadcastScenario::new(1.0, vec![1.0, 0.0], 1.0, 1.0),
            Err(Error::NonPositiveParameter { name: "noise", .. })
        ));
        assert!(matches!(
            BroadcastScenario::new(1.0, vec![1.0], 1.0, f64::NAN),
            Err(Error::NonPositiveParameter { name: "source_var", .. })
        ));
        assert_eq!(
            BroadcastScenario::new(1.0, vec![], 1.0, 1.0),
            Err(Error::NoReceivers)
        );
    }

    #[test]
    fn scenario_file_defaults_source_var() {
        let s: BroadcastScenario =
            serde_json::from_str(r#"{"power":3,"noises":[3,1],"bandwidth":1}"#).unwrap();
        assert_eq!(s.source_var(), 1.0);
        let bad: std::result::Result<BroadcastScenario, _> =
            serde_json::from_str(r#"{"power":3,"noises":[1,3],"bandwidth":1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn trivial_distortion_values() {
        assert_eq!(scn(1.0).trivial_distortion(1).unwrap(), 0.5);
        assert_eq!(scn(2.0).trivial_distortion(2).unwrap(), 0.0625);
        let d = scn(0.5).trivial_distortion(1).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
        assert_eq!(
            scn(1.0).trivial_distortion(3),
            Err(Error::IndexOutOfRange { index: 3, len: 2 })
        );
        assert!(scn(1.0).trivial_distortion(0).is_err());
    }

    #[test]
    fn trivial_distortion_scales_with_source_var() {
        let s = BroadcastScenario::new(3.0, vec![3.0, 1.0], 1.0, 2.0).unwrap();
        assert_eq!(s.trivial_distortion(1).unwrap(), 1.0);
    }

    #[test]
    fn delta_noise_last_is_noise() {
        let s = scn(1.0);
        assert_eq!(s.delta_noise(0), 2.0);
        assert_eq!(s.delta_noise(1), 1.0);
    }

    #[test]
    fn step_schedules() {
        let inf = f64::INFINITY;
        assert_eq!(tau_step_schedule(3, 2).unwrap().values(), vec![inf, 0.0, 0.0]);
        assert_eq!(tau_step_schedule(1, 1).unwrap().values(), vec![0.0]);
        assert_eq!(tau_step_schedule(2, 1).unwrap().values(), vec![0.0, 0.0]);
        assert_eq!(tau_step_schedule(4, 4).unwrap().values(), vec![inf, inf, inf, 0.0]);
        assert!(tau_step_schedule(2, 3).is_err());
        assert!(tau_step_schedule(2, 0).is_err());
    }

    #[test]
    fn schedule_invariants_enforced() {
        assert!(matches!(
            TauSchedule::from_values(&[2.0, 1.0]),
            Err(Error::LastTauNonZero(_))
        ));
        assert!(matches!(
            TauSchedule::from_values(&[0.0, 1.0]),
            Err(Error::NonMonotoneTau { index: 2, .. })
        ));
        assert!(matches!(
            TauSchedule::from_values(&[1.0, 2.0, 0.0]),
            Err(Error::NonMonotoneTau { index: 2, .. })
        ));
        assert!(TauSchedule::from_values(&[f64::INFINITY, f64::INFINITY, 3.0, 0.0]).is_ok());
        assert!(TauSchedule::from_values(&[f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn compact_coordinates_round_trip() {
        let t = TauSchedule::from_values(&[f64::INFINITY, 1.0, 0.0]).unwrap();
        assert_eq!(t.compact(), vec![1.0, 0.5, 0.0]);
        assert_eq!(TauSchedule::from_compact(&t.compact()).unwrap(), t);
    }

    #[test]
    fn distortion_checks() {
        let s = scn(1.0);
        assert!(s.check_distortions(&DistortionTuple::new(vec![1.0, 0.5]).unwrap()).is_ok());
        assert!(matches!(
            s.check_distortions(&DistortionTuple::new(vec![1.5, 0.5]).unwrap()),
            Err(Error::InvalidDistortion { index: 1, .. })
        ));
        assert!(matches!(
            s.check_distortions(&DistortionTuple::new(vec![0.5]).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(DistortionTuple::new(vec![0.0, 0.5]).is_err());
    }
}
