//! Lebesgue exponents in `[1, ∞]`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A Lebesgue exponent `p ∈ [1, ∞]`.
///
/// Most formulas only need the reciprocal `1/p`, which is `0` at `p = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Exponent(format!("{p} is not in [1, inf]")));
        }
        Ok(Exponent(p))
    }

    /// Builds the exponent with the given reciprocal `1/p ∈ [0, 1]`.
    pub fn from_reciprocal(inv: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&inv) {
            return Err(Error::Exponent(format!(
                "reciprocal {inv} is not in [0, 1]"
            )));
        }
        if inv == 0.0 {
            Ok(Exponent::INFINITY)
        } else {
            Ok(Exponent(1.0 / inv))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        if self.0.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// Hölder conjugate `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INFINITY
        } else if self.0.is_infinite() {
            Exponent::ONE
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }

    /// The factor `p^{-d/(2p)}` that appears in Gaussian `L^p` norms; `1` at `p = ∞`.
    pub fn gaussian_factor(self, d: usize) -> f64 {
        if self.0.is_infinite() {
            1.0
        } else {
            self.0.powf(-(d as f64) / (2.0 * self.0))
        }
    }
}

impl TryFrom<f64> for Exponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Exponent::new(p)
    }
}

impl From<Exponent> for f64 {
    fn from(p: Exponent) -> f64 {
        p.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Shorthand for building exponents in tests and sweeps; panics outside `[1, ∞]`.
pub fn exp(p: f64) -> Exponent {
    Exponent::new(p).expect("exponent must lie in [1, inf]")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        assert_eq!(exp(1.0).conjugate(), Exponent::INFINITY);
        assert_eq!(Exponent::INFINITY.conjugate(), Exponent::ONE);
        assert_eq!(exp(2.0).conjugate(), exp(2.0));
        assert!((exp(4.0).conjugate().value() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_below_one() {
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(Exponent::from_reciprocal(1.5).is_err());
    }

    #[test]
    fn reciprocal_round_trip() {
        assert_eq!(Exponent::from_reciprocal(0.0).unwrap(), Exponent::INFINITY);
        assert_eq!(Exponent::from_reciprocal(0.25).unwrap().value(), 4.0);
        assert_eq!(Exponent::INFINITY.recip(), 0.0);
    }
}
