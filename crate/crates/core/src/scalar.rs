//! Scalar abstractions.
//!
//! Every numeric routine in the crate is written against [`Scalar`], which is
//! implemented for `f32` and `f64`. Exponent arithmetic additionally accepts
//! any [`ExactField`], so the critical-exponent identities can be evaluated in
//! rational arithmetic with zero residual.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
use rustfft::FftNum;

/// Floating point type usable by the spectral and quadrature machinery.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Default
    + Display
    + Debug
    + serde::Serialize
    + serde::de::DeserializeOwned
{
    /// Converts an `f64` literal into `Self`, rounding if needed.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Field-like number type closed under `+ - * /`, used for exponent formulas.
///
/// Implemented for the float types and for rationals such as
/// [`num_rational::BigRational`].
pub trait ExactField: Clone + Num + Neg<Output = Self> + PartialOrd + FromPrimitive + Debug {
    #[inline]
    fn int(n: i64) -> Self {
        <Self as FromPrimitive>::from_i64(n).expect("integer representable")
    }

    #[inline]
    fn ratio(num: i64, den: i64) -> Self {
        Self::int(num) / Self::int(den)
    }
}

impl<T: Clone + Num + Neg<Output = T> + PartialOrd + FromPrimitive + Debug> ExactField for T {}
