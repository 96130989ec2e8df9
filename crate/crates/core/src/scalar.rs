//! Scalar abstraction shared by every model type.
//!
//! Models, conversions and the exhaustive oracle only need ring arithmetic
//! plus ordering, so they are generic over [`Scalar`] and work for `f32`,
//! `f64` and exact rationals alike. The Monte Carlo engines additionally need
//! `exp`/`ln` and are bounded on [`Real`].

use std::fmt::{Debug, Display};

use num_rational::Rational64;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Slack used when comparing energies for ground-state membership.
    fn tie_tolerance() -> Self;

    fn is_finite_value(&self) -> bool;

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }

    fn quarter() -> Self {
        Self::half() * Self::half()
    }

    /// Lossy conversion used for reporting and for random instance generation.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("value representable in scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn tie_tolerance() -> Self {
        1e-9
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn tie_tolerance() -> Self {
        1e-4
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Rational64 {
    fn tie_tolerance() -> Self {
        Rational64::from_integer(0)
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

/// Floating point scalars usable by the sampling engines.
pub trait Real: Scalar + Float {}

impl Real for f32 {}
impl Real for f64 {}

/// Largest absolute value in an iterator, zero when empty.
pub(crate) fn max_abs<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values
        .into_iter()
        .map(|v| v.abs())
        .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
}
