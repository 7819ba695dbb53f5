//! Minkowski's inequality for power sums over `[0, +inf]`, including the
//! reversed direction for `p > 1` and the equality conditions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;

/// Relative tolerance for direction and equality decisions.
pub const EQUALITY_TOLERANCE: f64 = 1e-9;

/// Relative tolerance for the ratio test in [`equality_condition`].
pub const RATIO_TOLERANCE: f64 = 1e-12;

/// A nonempty vector of extended reals.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ExtVector(Vec<ExtReal>);

impl ExtVector {
    pub fn new(entries: Vec<ExtReal>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::LengthMismatch(0, 1));
        }
        Ok(ExtVector(entries))
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| ExtReal::new(v)).collect::<Result<_>>()?)
    }

    pub fn entries(&self) -> &[ExtReal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn has_infinity(&self) -> bool {
        self.0.iter().any(|x| x.is_infinite())
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|x| *x == ExtReal::ZERO)
    }
}

/// `(sum x_i^p)^(1/p)`, evaluated as a log-sum-exp over the finite entries.
pub fn power_sum(x: &ExtVector, p: f64) -> Result<ExtReal> {
    if p == 0.0 || p.is_nan() {
        return Err(Error::ZeroP);
    }
    let mut logs = Vec::with_capacity(x.len());
    for e in x.entries() {
        match (e.is_infinite(), e.value() == 0.0) {
            // inf^p is inf for p > 0 and 0 for p < 0
            (true, _) if p > 0.0 => return Ok(ExtReal::INFINITY),
            (true, _) => {}
            // 0^p is 0 for p > 0 and inf for p < 0, whose sum maps back to 0
            (false, true) if p > 0.0 => {}
            (false, true) => return Ok(ExtReal::ZERO),
            (false, false) => logs.push(p * e.value().ln()),
        }
    }
    if logs.is_empty() {
        return Ok(if p > 0.0 { ExtReal::ZERO } else { ExtReal::INFINITY });
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = peak + logs.iter().map(|l| (l - peak).exp()).sum::<f64>().ln();
    Ok(ExtReal::new((lse / p).exp()).unwrap_or(ExtReal::INFINITY))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinkowskiCheck {
    /// The inequality holds in the direction implied by `p`.
    pub direction_holds: bool,
    pub equality: bool,
    /// `||x||_p + ||y||_p`
    pub lhs: ExtReal,
    /// `||x + y||_p`
    pub rhs: ExtReal,
}

/// Checks `||x||_p + ||y||_p <= ||x + y||_p` for `0 < p < 1`, or `>=` for
/// `p > 1`.
pub fn check_minkowski(x: &ExtVector, y: &ExtVector, p: f64) -> Result<MinkowskiCheck> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if !(p > 0.0 && p.is_finite()) || (p - 1.0).abs() < 1e-3 {
        return Err(Error::InvalidP(p));
    }
    let sum = ExtVector(x.entries().iter().zip(y.entries()).map(|(a, b)| *a + *b).collect());
    let lhs = power_sum(x, p)? + power_sum(y, p)?;
    let rhs = power_sum(&sum, p)?;
    let (l, r) = (lhs.value(), rhs.value());
    let equality = if lhs.is_infinite() || rhs.is_infinite() {
        lhs == rhs
    } else {
        (l - r).abs() <= EQUALITY_TOLERANCE * r.max(1.0)
    };
    let direction_holds = equality || if p < 1.0 { l <= r } else { l >= r };
    Ok(MinkowskiCheck {
        direction_holds,
        equality,
        lhs,
        rhs,
    })
}

/// Equality condition: `y = lambda x` for some `lambda >= 0`, or `x`
/// is all zero, or an entry of either vector is `+inf`.
pub fn equality_condition(x: &ExtVector, y: &ExtVector) -> Result<bool> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.has_infinity() || y.has_infinity() || x.is_zero() || y.is_zero() {
        return Ok(true);
    }
    let mut ratio: Option<f64> = None;
    for (a, b) in x.entries().iter().zip(y.entries()) {
        let (a, b) = (a.value(), b.value());
        match (a == 0.0, b == 0.0) {
            (true, true) => continue,
            (true, false) | (false, true) => return Ok(false),
            (false, false) => {
                let r = b / a;
                match ratio {
                    None => ratio = Some(r),
                    Some(r0) if (r - r0).abs() <= RATIO_TOLERANCE * r0.max(r) => {}
                    Some(_) => return Ok(false),
                }
            }
        }
    }
    Ok(true)
}
