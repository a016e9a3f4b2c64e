//! Exact entropy values for linear sources.
//!
//! Every entropy, rate or capacity of a finite linear source over F_q is a
//! rational multiple of `log2 q`. [`EntropyValue`] stores that multiple exactly
//! and derives bits only for display.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EntropyValue {
    units: Ratio<i64>,
    q: u64,
}

impl EntropyValue {
    /// `units * log2 q`.
    pub fn new(units: i64, q: u64) -> Self {
        EntropyValue { units: Ratio::from_integer(units), q }
    }

    pub fn from_ratio(units: Ratio<i64>, q: u64) -> Self {
        EntropyValue { units, q }
    }

    pub fn zero(q: u64) -> Self {
        Self::new(0, q)
    }

    /// Multiple of `log2 q`.
    pub fn units(&self) -> Ratio<i64> {
        self.units
    }

    /// Integer multiple of `log2 q`, if the value is integral.
    pub fn integer_units(&self) -> Option<i64> {
        self.units.is_integer().then(|| self.units.to_integer())
    }

    pub fn log_base(&self) -> u64 {
        self.q
    }

    pub fn bits(&self) -> f64 {
        self.units.to_f64().unwrap_or(f64::NAN) * (self.q as f64).log2()
    }

    pub fn is_zero(&self) -> bool {
        self.units.is_zero()
    }

    pub fn min(self, other: Self) -> Self {
        assert_eq!(self.q, other.q, "entropy values with different log bases");
        if other.units < self.units {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        assert_eq!(self.q, other.q, "entropy values with different log bases");
        if other.units > self.units {
            other
        } else {
            self
        }
    }

    /// Scale by a rational factor.
    pub fn scale(self, r: Ratio<i64>) -> Self {
        EntropyValue { units: self.units * r, q: self.q }
    }
}

impl PartialOrd for EntropyValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        if self.q != other.q {
            return None;
        }
        self.units.partial_cmp(&other.units)
    }
}

impl Add for EntropyValue {
    type Output = EntropyValue;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.q, rhs.q, "entropy values with different log bases");
        EntropyValue { units: self.units + rhs.units, q: self.q }
    }
}

impl Sub for EntropyValue {
    type Output = EntropyValue;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.q, rhs.q, "entropy values with different log bases");
        EntropyValue { units: self.units - rhs.units, q: self.q }
    }
}

impl Neg for EntropyValue {
    type Output = EntropyValue;
    fn neg(self) -> Self {
        EntropyValue { units: -self.units, q: self.q }
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.units.is_integer() {
            write!(f, "{}*log2({})", self.units.to_integer(), self.q)
        } else {
            write!(f, "({})*log2({})", self.units, self.q)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Wire {
    num: i64,
    den: i64,
    log_base: u64,
    bits: f64,
}

impl Serialize for EntropyValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire { num: *self.units.numer(), den: *self.units.denom(), log_base: self.q, bits: self.bits() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EntropyValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        if w.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(EntropyValue { units: Ratio::new(w.num, w.den), q: w.log_base })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_bits() {
        let a = EntropyValue::new(3, 4);
        let b = EntropyValue::new(1, 4);
        assert_eq!((a - b).bits(), 4.0);
        assert_eq!(a.scale(Ratio::new(1, 3)).units(), Ratio::from_integer(1));
        assert!(b < a);
    }

    #[test]
    fn json_round_trip() {
        let a = EntropyValue::from_ratio(Ratio::new(5, 2), 3);
        let s = serde_json::to_string(&a).unwrap();
        let b: EntropyValue = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
