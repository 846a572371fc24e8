//! Scalar abstraction for the math core.
//!
//! Everything in [`crate::law`], [`crate::fit`], [`crate::metrics`] and
//! [`crate::ztest`] is generic over [`Real`] so the same formulas run in
//! `f32` or `f64`. The data pipeline (ingestion, predictor, simulator)
//! is concrete `f64`; the crate root re-exports `f64` aliases.

use std::fmt::{Debug, Display};

use num_traits::Float;

/// Floating-point scalar usable by the math core.
pub trait Real: Float + Debug + Display + Send + Sync + 'static {}

impl<T> Real for T where T: Float + Debug + Display + Send + Sync + 'static {}

/// Converts an `f64` constant into the working scalar type.
///
/// Panics only if the constant is not representable, which cannot happen
/// for the finite literals used in this crate.
#[inline]
pub(crate) fn c<F: Real>(x: f64) -> F {
    F::from(x).expect("constant representable in scalar type")
}

/// Complementary error function, evaluated through `f64`.
///
/// `f64` is the widest scalar we support, so routing through `libm::erfc`
/// loses nothing for `f64` and is more than accurate enough for `f32`.
#[inline]
pub(crate) fn erfc<F: Real>(x: F) -> F {
    c(libm::erfc(x.to_f64().expect("finite scalar")))
}
