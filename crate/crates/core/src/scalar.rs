//! Scalar abstraction shared by every numerical module.
//!
//! All state, channel and analysis code is written against [`Real`], so the
//! same engine runs in `f32` or `f64`. The Monte Carlo driver and the scenario
//! files are `f64`-only.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + LowerExp + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Default tolerance for algebraic identities at this precision.
    ///
    /// `1e-12` for `f64`, scaled up from machine epsilon for narrower types.
    #[inline]
    fn identity_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Default tolerance for composed channels and validation checks.
    #[inline]
    fn channel_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(256.0))
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + LowerExp + Default + Sum + Send + Sync + 'static
{
}

/// Complex amplitude over the scalar `T`.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn ci<T: Real>(im: T) -> C<T> {
    Complex::new(T::zero(), im)
}

/// `sqrt(n!)` for small photon numbers.
pub(crate) fn sqrt_factorial<T: Real>(n: u8) -> T {
    let mut acc = T::one();
    for k in 2..=n {
        acc = acc * T::from_u8(k).unwrap();
    }
    acc.sqrt()
}

/// Binomial coefficient as a scalar.
pub(crate) fn binomial<T: Real>(n: u8, k: u8) -> T {
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_u8(n - i).unwrap() / T::from_u8(i + 1).unwrap();
    }
    acc
}
