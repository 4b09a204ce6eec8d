//! Scalar abstraction shared by the numeric modules.

use std::fmt;

use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Real floating-point scalar the controller math is generic over (`f32`, `f64`).
pub trait Real: RealField + Copy + ToPrimitive + fmt::LowerExp {}

impl<T> Real for T where T: RealField + Copy + ToPrimitive + fmt::LowerExp {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

/// Lossy conversion back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
