//! Floating-point abstraction for the numeric core.
//!
//! All formulas in this crate are plain scalar arithmetic, so they are written
//! against [`Scalar`] and work for both `f32` and `f64`. The crate root
//! exposes `f64` aliases for the common case; note that the default
//! tolerances in [`crate::QuadratureConfig`] assume `f64` precision and must
//! be loosened for `f32` work.

use std::fmt::{Debug, Display};

/// Scalar type the library computes in.
///
/// `num_traits::Float` supplies the arithmetic and the IEEE special values
/// (flagged sweep points are represented as `infinity()`/`nan()`), while
/// `FromPrimitive` lets the closed-form constants embedded in the crate be
/// converted from `f64` literals.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + Debug + Display + 'static
{
}

impl<T> Scalar for T where
    T: num_traits::Float + num_traits::FromPrimitive + Debug + Display + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the constant is not representable, which cannot happen for
/// the finite literals used in this crate (for `f32` the conversion rounds).
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("numeric constant must be representable")
}

/// Best-effort conversion to `f64` for diagnostics and error payloads.
pub(crate) fn as_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
