//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Real floating-point type the calculus is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Send
    + Sync
    + Debug
    + Display
    + LowerExp
    + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count or index into this type.
    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }

    /// Converts a signed integer into this type.
    #[inline]
    fn of_i64(x: i64) -> Self {
        Self::from_i64(x).expect("i64 representable")
    }

    /// Lossless widening to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}` for a frequency point stored as `[ξ₁, ξ₂]` (`ξ₂ = 0` in 1D).
#[inline]
pub fn japanese<T: Real>(xi: [T; 2]) -> T {
    (T::one() + xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> C<T> {
    C::new(theta.cos(), theta.sin())
}

/// Widens a complex value to double precision.
#[inline]
pub fn to_c64<T: Real>(z: C<T>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

/// Narrows a double-precision complex value to `T`.
#[inline]
pub fn from_c64<T: Real>(z: Complex<f64>) -> C<T> {
    C::new(T::lit(z.re), T::lit(z.im))
}
