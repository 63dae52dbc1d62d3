use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default denominator used when a Lipschitz constant arrives as a float.
pub const LIPSCHITZ_DENOMINATOR: u64 = 1_000_000;

/// A positive rational Lipschitz constant `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Lipschitz {
    num: u64,
    den: u64,
}

impl Lipschitz {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::ContractViolation(format!("Lipschitz constant {num}/{den} must be positive")));
        }
        let g = num.gcd(&den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn integer(l: u64) -> Result<Self> {
        Self::new(l, 1)
    }

    /// Rounds `value` up to a multiple of `1/LIPSCHITZ_DENOMINATOR`, so the
    /// result is still a valid Lipschitz constant.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::ContractViolation(format!("Lipschitz constant {value} must be positive")));
        }
        let scaled = value * LIPSCHITZ_DENOMINATOR as f64;
        let rounded = scaled.round();
        let num = if (scaled - rounded).abs() <= 1e-9 * scaled.max(1.0) { rounded } else { scaled.ceil() };
        Self::new(num as u64, LIPSCHITZ_DENOMINATOR)
    }

    /// `(1+κ)/(1−κ)` for a κ-strict pseudo-contraction, with κ = `num/den`.
    pub fn from_strictness(kappa_num: u64, kappa_den: u64) -> Result<Self> {
        if kappa_den == 0 || kappa_num >= kappa_den {
            return Err(Error::ContractViolation(format!(
                "strictness {kappa_num}/{kappa_den} must lie in [0, 1)"
            )));
        }
        Self::new(kappa_den + kappa_num, kappa_den - kappa_num)
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `⌈L⌉`
    pub fn ceil(&self) -> u64 {
        self.num.div_ceil(self.den)
    }

    pub(crate) fn num_big(&self) -> BigUint {
        BigUint::from(self.num)
    }

    pub(crate) fn den_big(&self) -> BigUint {
        BigUint::from(self.den)
    }
}

impl TryFrom<f64> for Lipschitz {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::from_f64(v)
    }
}

impl From<Lipschitz> for f64 {
    fn from(l: Lipschitz) -> f64 {
        l.as_f64()
    }
}

impl fmt::Display for Lipschitz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// `(1+κ)/(1−κ)` as a float.
pub fn strict_pc_lipschitz(kappa: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::ContractViolation(format!("strictness {kappa} must lie in [0, 1)")));
    }
    Ok((1.0 + kappa) / (1.0 - kappa))
}
