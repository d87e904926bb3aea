//! Scalar abstraction: every numeric kernel in this crate is generic over a
//! floating-point type implementing [`Real`]. `f64` is the default choice for
//! the pipeline; `f32` matches the checkpoint storage format exactly.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::Float;

/// Floating-point scalar usable throughout the crate: f32 or f64.
pub trait Real:
    Float
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    const PI: Self;
    const TWO_PI: Self;
    const LN_2: Self;

    /// Lossless-enough conversion from f64 literals and config values.
    fn from_f64(v: f64) -> Self;
    /// Widening conversion for reporting and serialization.
    fn to_f64_lossy(self) -> f64;
    /// Conversion from usize counts.
    fn from_usize(v: usize) -> Self;
}

impl Real for f32 {
    const PI: Self = std::f32::consts::PI;
    const TWO_PI: Self = 2.0 * std::f32::consts::PI;
    const LN_2: Self = std::f32::consts::LN_2;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
    #[inline]
    fn from_usize(v: usize) -> Self {
        v as f32
    }
}

impl Real for f64 {
    const PI: Self = std::f64::consts::PI;
    const TWO_PI: Self = 2.0 * std::f64::consts::PI;
    const LN_2: Self = std::f64::consts::LN_2;

    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
    #[inline]
    fn from_usize(v: usize) -> Self {
        v as f64
    }
}
