//! Nonnegative extended reals: `[0, +inf]` without NaN.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A value in `[0, +inf]`. NaN and negative numbers are not representable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(0.0);
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidExtReal(value));
        }
        // normalise -0.0
        Ok(ExtReal(value + 0.0))
    }

    pub fn finite(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidExtReal(value));
        }
        Self::new(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        ExtReal(self.0 + rhs.0)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Parses a decimal literal or the exact spelling `inf`. Other spellings of
/// infinity (`Infinity`, `+inf`, ...) and NaN are rejected.
impl FromStr for ExtReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" {
            return Ok(ExtReal::INFINITY);
        }
        let v: f64 = s.parse().map_err(|_| Error::InvalidExtReal(f64::NAN))?;
        ExtReal::finite(v)
    }
}

// JSON has no infinity literal, so +inf travels as the string "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => ExtReal::finite(v).map_err(serde::de::Error::custom),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_and_negative() {
        assert!(ExtReal::new(f64::NAN).is_err());
        assert!(ExtReal::new(-1e-300).is_err());
        assert_eq!(ExtReal::new(-0.0).unwrap().value().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn parses_only_inf_spelling() {
        assert!("inf".parse::<ExtReal>().unwrap().is_infinite());
        assert_eq!("2.5".parse::<ExtReal>().unwrap().value(), 2.5);
        for bad in ["Infinity", "infinity", "+inf", "NaN", "-1", "abc"] {
            assert!(bad.parse::<ExtReal>().is_err(), "{bad}");
        }
    }

    #[test]
    fn ordering_puts_infinity_last() {
        let mut v = [ExtReal::INFINITY, ExtReal::ZERO, ExtReal::new(3.0).unwrap()];
        v.sort();
        assert_eq!(v[0], ExtReal::ZERO);
        assert!(v[2].is_infinite());
    }

    #[test]
    fn serde_round_trip_with_inf() {
        let v = vec![ExtReal::INFINITY, ExtReal::new(1.5).unwrap()];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["inf",1.5]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
