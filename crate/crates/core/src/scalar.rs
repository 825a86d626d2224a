//! Scalar types for stream outputs and transition weights.
//!
//! Everything downstream compares observations for exact equality (partition
//! refinement, lasso detection), so a scalar must be `Eq + Ord + Hash`. That rules
//! out raw floating point; the shipped implementations are exact rationals.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// An exact, totally ordered number usable as a stream output or weight.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + FromStr
    + Eq
    + Ord
    + Hash
    + Num
    + Signed
    + FromPrimitive
    + Send
    + Sync
    + 'static
{
    /// True if the value is a whole number.
    fn is_integral(&self) -> bool;

    /// The value as a family index, if it is a non-negative integer that fits.
    fn to_index(&self) -> Option<u64>;

    fn from_index(n: u64) -> Self {
        Self::from_u64(n).expect("u64 fits every scalar")
    }

    /// Parses the textual form `p/q` or `p`.
    fn parse_scalar(text: &str) -> Option<Self> {
        Self::from_str(text.trim()).ok()
    }

    fn is_non_negative(&self) -> bool {
        !self.is_negative()
    }

    fn add_ref(&self, other: &Self) -> Self {
        self.clone() + other.clone()
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self.clone() - other.clone()
    }

    fn mul_ref(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }
}

macro_rules! impl_ratio_scalar {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            fn is_integral(&self) -> bool {
                self.is_integer()
            }

            fn to_index(&self) -> Option<u64> {
                if self.is_integer() && !self.is_negative() {
                    self.numer().to_u64()
                } else {
                    None
                }
            }

            // Integer operands skip the gcd normalization of `Ratio`.
            fn add_ref(&self, other: &Self) -> Self {
                if self.is_integer() && other.is_integer() {
                    Ratio::from_integer(self.numer() + other.numer())
                } else {
                    self + other
                }
            }

            fn sub_ref(&self, other: &Self) -> Self {
                if self.is_integer() && other.is_integer() {
                    Ratio::from_integer(self.numer() - other.numer())
                } else {
                    self - other
                }
            }

            fn mul_ref(&self, other: &Self) -> Self {
                if self.is_integer() && other.is_integer() {
                    Ratio::from_integer(self.numer() * other.numer())
                } else {
                    self * other
                }
            }
        }
    };
}

impl_ratio_scalar!(BigInt);
impl_ratio_scalar!(i64);

/// Builds a rational `numer/denom`. Panics on a zero denominator.
pub fn ratio<S: Scalar>(numer: i64, denom: i64) -> S {
    assert!(denom != 0, "zero denominator");
    let n = S::from_i64(numer).expect("i64 fits every scalar");
    let d = S::from_i64(denom).expect("i64 fits every scalar");
    n / d
}

/// Builds an integral scalar.
pub fn int<S: Scalar>(n: i64) -> S {
    S::from_i64(n).expect("i64 fits every scalar")
}
