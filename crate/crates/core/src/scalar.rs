//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::{BigRational, Ratio};
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive, Zero};

/// Floating point scalar used throughout the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Converts an `f64` literal. Every `f64` value is representable (possibly
    /// rounded) in the supported types, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// How close to zero a sum of terms must be to count as vanishing.
///
/// Exact types (rationals) demand literal zero; floating types allow a few
/// ulps of the largest term.
pub trait ExactZero: Clone {
    fn is_negligible(value: &Self, scale: &Self) -> bool;
}

macro_rules! impl_float_zero {
    ($t:ty) => {
        impl ExactZero for $t {
            fn is_negligible(value: &Self, scale: &Self) -> bool {
                value.abs() <= 16.0 * <$t>::EPSILON * scale.abs().max(<$t>::MIN_POSITIVE)
            }
        }
    };
}

impl_float_zero!(f32);
impl_float_zero!(f64);

macro_rules! impl_ratio_zero {
    ($t:ty) => {
        impl ExactZero for Ratio<$t> {
            fn is_negligible(value: &Self, _scale: &Self) -> bool {
                value.is_zero()
            }
        }
    };
}

impl_ratio_zero!(i64);
impl_ratio_zero!(i128);

impl ExactZero for BigRational {
    fn is_negligible(value: &Self, _scale: &Self) -> bool {
        value.is_zero()
    }
}
