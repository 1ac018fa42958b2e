//! Floating-point abstraction shared by every numerical kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real scalar the laboratory can run on: `f32` or `f64`.
///
/// Tolerances quoted in tests assume `f64`; `f32` is supported for the
/// spectral kernels where single precision is good enough.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// The bracket `<x> = 1 + |x|`.
    #[inline]
    fn bracket(self) -> Self {
        Self::one() + self.abs()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_is_one_plus_abs() {
        assert_eq!(3.0f64.bracket(), 4.0);
        assert_eq!((-3.0f64).bracket(), 4.0);
        assert_eq!(0.0f32.bracket(), 1.0);
    }

    #[test]
    fn literal_round_trip() {
        assert_eq!(f64::lit(0.25), 0.25);
        assert_eq!(f32::lit(0.5), 0.5f32);
    }
}
