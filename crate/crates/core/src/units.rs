//! Exact decimal arithmetic for penalties, credits and scores.
//!
//! Every penalty and credit value is stored as an integer count of
//! 1/10000 units. Sums and comparisons are therefore exact, which keeps
//! elitist `>` comparisons and incremental re-evaluation bit-identical
//! on every platform.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Number of units in 1.0.
pub const SCALE: i64 = 10_000;

/// A fixed-point decimal with four fractional digits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed(i64);

impl Fixed {
    pub const ZERO: Fixed = Fixed(0);
    pub const ONE: Fixed = Fixed(SCALE);

    pub const fn from_units(units: i64) -> Self {
        Fixed(units)
    }

    pub const fn units(self) -> i64 {
        self.0
    }

    /// Converts a decimal literal such as `0.05` or `1.5`.
    ///
    /// Returns `None` for non-finite values and for values that need more
    /// than four fractional digits.
    pub fn from_f64(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        let scaled = value * SCALE as f64;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-6 * scaled.abs().max(1.0) || rounded.abs() > 1e15 {
            return None;
        }
        Some(Fixed(rounded as i64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn max(self, other: Fixed) -> Fixed {
        Fixed(self.0.max(other.0))
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

impl AddAssign for Fixed {
    fn add_assign(&mut self, rhs: Fixed) {
        self.0 += rhs.0;
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 - rhs.0)
    }
}

impl SubAssign for Fixed {
    fn sub_assign(&mut self, rhs: Fixed) {
        self.0 -= rhs.0;
    }
}

impl Mul<i64> for Fixed {
    type Output = Fixed;
    fn mul(self, rhs: i64) -> Fixed {
        Fixed(self.0 * rhs)
    }
}

impl Sum for Fixed {
    fn sum<I: Iterator<Item = Fixed>>(iter: I) -> Fixed {
        iter.fold(Fixed::ZERO, Add::add)
    }
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let whole = abs / SCALE as u64;
        let frac = abs % SCALE as u64;
        if frac == 0 {
            write!(f, "{sign}{whole}")
        } else {
            let digits = format!("{frac:04}");
            write!(f, "{sign}{whole}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Fixed {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = f64::deserialize(deserializer)?;
        Fixed::from_f64(value).ok_or_else(|| {
            serde::de::Error::custom(format!(
                "{value} is not a finite decimal with at most four fractional digits"
            ))
        })
    }
}

/// An exact solution score: `numerator / denominator`, always in `[0, 1]`.
///
/// The denominator is `n_f * SCALE` for the instance that produced it, so
/// two scores from the same instance compare by numerator alone. Ordering
/// across denominators is still exact (cross multiplication), and equality
/// is by value.
#[derive(Clone, Copy, Debug)]
pub struct Score {
    numerator: u64,
    denominator: u64,
}

impl Score {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        assert!(denominator > 0, "score denominator must be positive");
        assert!(numerator <= denominator, "score must lie in [0, 1]");
        Score {
            numerator,
            denominator,
        }
    }

    pub fn zero(denominator: u64) -> Self {
        Score::new(0, denominator)
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn denominator(self) -> u64 {
        self.denominator
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn as_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// Score as a percentage ("accuracy" in comparison tables).
    pub fn percent(self) -> f64 {
        100.0 * self.as_f64()
    }

    /// Signed difference `self - other` as a float; used for annealing.
    pub fn diff_f64(self, other: Score) -> f64 {
        if self.denominator == other.denominator {
            (self.numerator as f64 - other.numerator as f64) / self.denominator as f64
        } else {
            self.as_f64() - other.as_f64()
        }
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.numerator as u128 * other.denominator as u128;
        let rhs = other.numerator as u128 * self.denominator as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.as_f64())
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.as_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(Fixed::from_f64(0.3).unwrap().units(), 3000);
        assert_eq!(Fixed::from_f64(0.05).unwrap().units(), 500);
        assert_eq!(Fixed::from_f64(1.5).unwrap().units(), 15000);
        assert_eq!(Fixed::from_f64(0.00001), None);
        assert_eq!(Fixed::from_f64(f64::NAN), None);
    }

    #[test]
    fn display_trims_trailing_zeros() {
        assert_eq!(Fixed::from_units(3000).to_string(), "0.3");
        assert_eq!(Fixed::from_units(30000).to_string(), "3");
        assert_eq!(Fixed::from_units(-500).to_string(), "-0.05");
    }

    #[test]
    fn score_ordering_is_exact_across_denominators() {
        let a = Score::new(1, 3);
        let b = Score::new(2, 6);
        assert_eq!(a.cmp(&b), Ordering::Equal);
        assert!(Score::new(17000, 20000) > Score::new(8499, 10000));
    }
}
