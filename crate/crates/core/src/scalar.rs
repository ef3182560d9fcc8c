//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the toolkit is generic over (`f32` or `f64`).
///
/// Constants in the algorithms are written as `f64` literals and lifted with
/// [`Real::lit`]. The complementary error function is delegated to `libm`,
/// which carries a correctly-rounded-in-practice implementation for both widths.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    fn erfc(self) -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

impl Real for f32 {
    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

/// Standard normal density.
pub fn normal_pdf<T: Real>(x: T) -> T {
    (-x * x / T::lit(2.0)).exp() / (T::TAU()).sqrt()
}

/// Standard normal distribution function, accurate in the lower tail.
pub fn normal_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * (-x / T::SQRT_2()).erfc()
}
