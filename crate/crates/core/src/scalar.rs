//! Real scalar abstraction.
//!
//! Every numeric routine in the crate is generic over a real type `R`
//! and works with `Complex<R>` entries. `f32` and `f64` both qualify.

use nalgebra::RealField;
use num_complex::Complex;

/// Real field usable as the base of the complex matrices in this crate.
pub trait Real: RealField + Copy + num_traits::ToPrimitive {}

impl<T> Real for T where T: RealField + Copy + num_traits::ToPrimitive {}

/// Converts an `f64` literal into `R`.
#[inline]
pub fn lit<R: Real>(x: f64) -> R {
    nalgebra::convert(x)
}

/// Converts `R` to `f64` for reporting and serialization.
#[inline]
pub fn to_f64<R: Real>(x: R) -> f64 {
    num_traits::ToPrimitive::to_f64(&x).unwrap_or(f64::NAN)
}

/// Builds a complex scalar from two `f64` parts.
#[inline]
pub fn cplx<R: Real>(re: f64, im: f64) -> Complex<R> {
    Complex::new(lit(re), lit(im))
}

#[inline]
pub fn czero<R: Real>() -> Complex<R> {
    Complex::new(R::zero(), R::zero())
}

#[inline]
pub fn cone<R: Real>() -> Complex<R> {
    Complex::new(R::one(), R::zero())
}

/// Embeds a real number as a complex scalar.
#[inline]
pub fn creal<R: Real>(x: R) -> Complex<R> {
    Complex::new(x, R::zero())
}
