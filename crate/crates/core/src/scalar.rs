//! Scalar abstraction for the numeric core.
//!
//! Everything in [`crate::channel`] and [`crate::exponents`] is written against
//! [`Real`], so the same code runs in `f64` (the default, see the aliases at the
//! crate root) or in `f32` for quick low-precision sweeps.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// A requested absolute tolerance, widened to what the type can resolve.
    ///
    /// `f64` gets `requested` unchanged for anything above ~1e-14; `f32` is
    /// floored at a few ulps of 1.
    #[inline]
    fn tol(requested: f64) -> Self {
        Self::lit(requested).max(Self::epsilon() * Self::lit(8.0))
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `0 ln 0 = 0` convention for `x ln(x / y)`; `x > 0, y = 0` gives `+inf`.
#[inline]
pub(crate) fn xlogx_over_y<T: Real>(x: T, y: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else if y <= T::zero() {
        T::infinity()
    } else {
        x * (x / y).ln()
    }
}
