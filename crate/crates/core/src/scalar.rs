use core::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the analytic model is generic over.
///
/// Implemented for `f32` and `f64`. The SI magnitudes that appear in the
/// noise spectra (ℏ² terms are ~1e-68) underflow `f32`, so single precision
/// is only meaningful for the dimensionless and cavity-geometry parts of the
/// crate; everything that touches force noise should run in `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub(crate) fn lit<T: Real>(v: f64) -> T {
    T::lit(v)
}

#[inline]
pub(crate) fn sq<T: Real>(v: T) -> T {
    v * v
}
