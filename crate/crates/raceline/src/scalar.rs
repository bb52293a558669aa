//! Floating-point abstraction so the whole stack runs in either `f32` or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssignOps, NumCast};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Scalar type used throughout the simulator, networks and trainers.
///
/// Everything numeric is generic over this trait; concrete aliases at the
/// crate root pin the default precision.
pub trait Scalar:
    Float + FloatConst + NumAssignOps + Sum + Copy + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for constants and config values.
    fn of(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("constant representable in scalar type")
    }

    /// Widening conversion to `f64`, for reporting and file output.
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("scalar convertible to f64")
    }

    /// One standard-normal draw from `rng`.
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform draw from the half-open range `[lo, hi)`.
    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;
}

impl Scalar for f32 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        rng.random_range(lo..hi)
    }
}

impl Scalar for f64 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        rng.random_range(lo..hi)
    }
}
