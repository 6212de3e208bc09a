//! Floating point scalar abstraction shared by every fitter in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the fitters are generic over: `f32` or `f64`.
///
/// Besides the arithmetic bounds the trait carries the numerical tolerances
/// that depend on the precision of the type. The `f64` values are the ones
/// the test suites pin; `f32` gets looser counterparts scaled to its epsilon.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Relative tolerance used when deciding that a residual attains the
    /// max-norm level: `|r| >= error - tol * (1 + error)`.
    fn certificate_tol() -> Self;

    /// Absolute width at which root brackets are considered converged.
    fn root_bracket_tol() -> Self;

    /// Relative size of `|q(z)|` accepted as a root of the quartet equation.
    fn root_residual_tol() -> Self;

    /// Largest `|k*t|` accepted when evaluating `exp(k*t)`.
    fn exp_arg_limit() -> Self;

    /// Converts an `f64` literal. Panics only for values that do not fit,
    /// which never happens for the constants used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }
}

impl Scalar for f64 {
    fn certificate_tol() -> Self {
        1e-9
    }
    fn root_bracket_tol() -> Self {
        1e-14
    }
    fn root_residual_tol() -> Self {
        1e-13
    }
    fn exp_arg_limit() -> Self {
        700.0
    }
}

impl Scalar for f32 {
    fn certificate_tol() -> Self {
        5e-4
    }
    fn root_bracket_tol() -> Self {
        1e-6
    }
    fn root_residual_tol() -> Self {
        1e-5
    }
    fn exp_arg_limit() -> Self {
        80.0
    }
}

/// Largest and smallest entry of a non-empty slice.
pub(crate) fn max_min<T: Scalar>(v: &[T]) -> (T, T) {
    v.iter().fold((T::neg_infinity(), T::infinity()), |(hi, lo), &x| {
        (hi.max(x), lo.min(x))
    })
}
