use crate::channel::{Channel, InputDist};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{e0_raw, nondegenerate_capacity, Flag};

/// Step of the central difference for `E0''(0)`.
pub const SECOND_DIFF_STEP: f64 = 1e-4;

/// How fast the focusing bound and `E'` fall to zero at capacity.
///
/// Slopes are magnitudes: nats of exponent lost per nat of rate gained.
#[derive(Debug, Clone, PartialEq)]
pub struct Slopes<T> {
    pub focusing: T,
    pub achieved: T,
    pub e0_second: T,
    pub capacity: T,
    pub e0_one: T,
    pub flags: Vec<Flag>,
}

/// `E0''(0)` at the uniform input, by a central difference with one
/// Richardson step.
pub fn e0_second_derivative<T: Real>(ch: &Channel<T>) -> T {
    let q = InputDist::uniform(ch.inputs());
    let d = |h: T| (e0_raw(ch, h, q.as_slice()) + e0_raw(ch, -h, q.as_slice())) / (h * h);
    let h = T::lit(SECOND_DIFF_STEP).max(T::epsilon().powf(T::lit(0.25)));
    let coarse = d(h);
    let fine = d(h / T::lit(2.0));
    (T::lit(4.0) * fine - coarse) / T::lit(3.0)
}

/// Near-capacity slopes of the focusing bound, `2C / |E0''(0)|`, and of the
/// achieved exponent, `E0(1) / (C - E0(1) E0''(0) / 2C)`.
///
/// When `E0''(0)` vanishes both slopes are `+inf` and
/// [`Flag::FlatSecondDerivative`] is set.
pub fn capacity_slopes<T: Real>(ch: &Channel<T>) -> Result<Slopes<T>> {
    if !ch.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let c = nondegenerate_capacity(ch)?;
    let q = InputDist::uniform(ch.inputs());
    let e1 = e0_raw(ch, T::one(), q.as_slice());
    let v = e0_second_derivative(ch);
    let flat = v.abs() < T::tol(1e-6) * c.max(T::lit(0.1));
    if flat {
        return Ok(Slopes {
            focusing: T::infinity(),
            achieved: T::infinity(),
            e0_second: v,
            capacity: c,
            e0_one: e1,
            flags: vec![Flag::FlatSecondDerivative],
        });
    }
    let two = T::lit(2.0);
    Ok(Slopes {
        focusing: two * c / v.abs(),
        achieved: e1 / (c - e1 / (two * c) * v),
        e0_second: v,
        capacity: c,
        e0_one: e1,
        flags: Vec::new(),
    })
}
