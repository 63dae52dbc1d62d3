//! Saturating arbitrary-precision naturals.
//!
//! Values are exact below a threshold `τ = 10^e`. Anything at or above `τ`
//! collapses to [`BoundNat::Huge`]. Every bound formula in this crate is
//! nondecreasing in its arguments, so the collapse never flips the answer to
//! "is this exact witness below the bound?".

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

pub const DEFAULT_TAU_EXPONENT: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoundNat {
    /// An exact value strictly below the saturation threshold.
    Exact(BigUint),
    /// Some value `>= τ`.
    Huge,
}

/// Outcome of comparing two saturating naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundOrdering {
    Less,
    Equal,
    Greater,
    /// Both sides are `Huge`; their order is unknown.
    Indeterminate,
}

impl BoundNat {
    pub fn zero() -> Self {
        BoundNat::Exact(BigUint::zero())
    }

    pub fn is_huge(&self) -> bool {
        matches!(self, BoundNat::Huge)
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            BoundNat::Exact(v) => Some(v),
            BoundNat::Huge => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.exact().and_then(|v| v.to_u64())
    }

    pub fn compare(&self, other: &BoundNat) -> BoundOrdering {
        match (self, other) {
            (BoundNat::Exact(a), BoundNat::Exact(b)) => match a.cmp(b) {
                Ordering::Less => BoundOrdering::Less,
                Ordering::Equal => BoundOrdering::Equal,
                Ordering::Greater => BoundOrdering::Greater,
            },
            (BoundNat::Exact(_), BoundNat::Huge) => BoundOrdering::Less,
            (BoundNat::Huge, BoundNat::Exact(_)) => BoundOrdering::Greater,
            (BoundNat::Huge, BoundNat::Huge) => BoundOrdering::Indeterminate,
        }
    }

    /// Whether the machine-sized `witness` lies at or below this bound.
    /// Decisive because an exact `u64` is always below `τ`.
    pub fn admits(&self, witness: u64) -> bool {
        match self {
            BoundNat::Exact(v) => BigUint::from(witness) <= *v,
            BoundNat::Huge => true,
        }
    }

    /// Larger of the two; `Huge` absorbs.
    pub fn max(&self, other: &BoundNat) -> BoundNat {
        match (self, other) {
            (BoundNat::Exact(a), BoundNat::Exact(b)) => BoundNat::Exact(a.max(b).clone()),
            _ => BoundNat::Huge,
        }
    }

    /// `⌈√v⌉` when exact. `None` for `Huge`, whose root is not known to be `>= τ`.
    pub fn ceil_sqrt(&self) -> Option<BoundNat> {
        self.exact().map(|v| BoundNat::Exact(ceil_sqrt(v)))
    }

    /// `⌈v / d⌉` when exact and `d > 0`.
    pub fn ceil_div(&self, d: &BigUint) -> Option<BoundNat> {
        if d.is_zero() {
            return None;
        }
        self.exact().map(|v| BoundNat::Exact(v.div_ceil(d)))
    }
}

pub(crate) fn ceil_sqrt(v: &BigUint) -> BigUint {
    let s = v.sqrt();
    if &(&s * &s) == v {
        s
    } else {
        s + 1u32
    }
}

/// Saturation threshold `τ = 10^exponent` and the arithmetic that respects it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Saturation {
    exponent: u32,
    tau: BigUint,
    tau_bits: u64,
}

impl Default for Saturation {
    fn default() -> Self {
        Self::new(DEFAULT_TAU_EXPONENT)
    }
}

impl Saturation {
    pub fn new(exponent: u32) -> Self {
        let exponent = exponent.max(1);
        let tau = num_traits::pow(BigUint::from(10u32), exponent as usize);
        let tau_bits = tau.bits();
        Self { exponent, tau, tau_bits }
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn tau(&self) -> &BigUint {
        &self.tau
    }

    pub fn clamp(&self, v: BigUint) -> BoundNat {
        if v >= self.tau {
            BoundNat::Huge
        } else {
            BoundNat::Exact(v)
        }
    }

    pub fn nat(&self, v: impl Into<BigUint>) -> BoundNat {
        self.clamp(v.into())
    }

    pub fn add(&self, a: &BoundNat, b: &BoundNat) -> BoundNat {
        match (a, b) {
            (BoundNat::Exact(x), BoundNat::Exact(y)) => self.clamp(x + y),
            _ => BoundNat::Huge,
        }
    }

    pub fn mul(&self, a: &BoundNat, b: &BoundNat) -> BoundNat {
        match (a, b) {
            (BoundNat::Exact(x), BoundNat::Exact(y)) => self.clamp(x * y),
            (BoundNat::Exact(x), BoundNat::Huge) | (BoundNat::Huge, BoundNat::Exact(x))
                if x.is_zero() =>
            {
                BoundNat::zero()
            }
            _ => BoundNat::Huge,
        }
    }

    pub fn square(&self, a: &BoundNat) -> BoundNat {
        self.mul(a, a)
    }

    /// `base^exp`, deciding saturation from bit lengths before materialising.
    pub fn pow(&self, base: &BoundNat, exp: &BoundNat) -> BoundNat {
        if let BoundNat::Exact(e) = exp {
            if e.is_zero() {
                return self.nat(1u32);
            }
        }
        let base = match base {
            BoundNat::Exact(b) if b.is_zero() => return BoundNat::zero(),
            BoundNat::Exact(b) if b.is_one() => return self.nat(1u32),
            BoundNat::Exact(b) => b,
            BoundNat::Huge => return BoundNat::Huge,
        };
        let e = match exp.exact().and_then(|e| e.to_u64()) {
            Some(e) if e <= self.tau_bits => e,
            _ => return BoundNat::Huge,
        };
        // base >= 2^(bits-1), so the power is at least 2^((bits-1)·e) > τ once
        // that exponent reaches the bit length of τ.
        if (base.bits() - 1).saturating_mul(e) >= self.tau_bits {
            return BoundNat::Huge;
        }
        self.clamp(base.pow(e as u32))
    }

    /// Decimal digits when exact, the token `>=1e<exponent>` when saturated.
    pub fn render(&self, v: &BoundNat) -> String {
        match v {
            BoundNat::Exact(x) => x.to_string(),
            BoundNat::Huge => format!(">=1e{}", self.exponent),
        }
    }
}

impl fmt::Display for BoundNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundNat::Exact(v) => write!(f, "{v}"),
            BoundNat::Huge => write!(f, "Huge"),
        }
    }
}
