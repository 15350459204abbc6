use crate::channel::{Channel, InputDist};
use crate::error::{Error, Result};
use crate::optim::minimize_on_simplex;
use crate::scalar::Real;

use super::ExponentValue;

/// Tolerance of the input-distribution search in [`e0_max`].
pub const E0_Q_TOL: f64 = 1e-10;

/// `p_xy^{1/(1+rho)}` for a fixed `rho`, so repeated evaluations over `q`
/// share the powers.
pub(crate) struct TiltedRows<T> {
    outputs: usize,
    a: Vec<T>,
    exponent: T,
}

impl<T: Real> TiltedRows<T> {
    pub(crate) fn new(ch: &Channel<T>, rho: T) -> Self {
        let s = T::one() / (T::one() + rho);
        let a = ch
            .rows()
            .flat_map(|row| row.iter().map(move |&p| if p > T::zero() { p.powf(s) } else { T::zero() }))
            .collect();
        Self { outputs: ch.outputs(), a, exponent: T::one() + rho }
    }

    /// `sum_y [sum_x q_x a_xy]^{1+rho}`
    pub(crate) fn mass(&self, q: &[T]) -> T {
        (0..self.outputs)
            .map(|y| {
                let inner: T = q.iter().enumerate().map(|(x, &qx)| qx * self.a[x * self.outputs + y]).sum();
                if inner > T::zero() {
                    inner.powf(self.exponent)
                } else {
                    T::zero()
                }
            })
            .sum()
    }
}

/// `E0(rho, q) = -ln sum_y [sum_x q_x p_xy^{1/(1+rho)}]^{1+rho}`, no argument checks.
///
/// Also valid for `-1 < rho < 0`, which the finite-difference slope code uses.
pub(crate) fn e0_raw<T: Real>(ch: &Channel<T>, rho: T, q: &[T]) -> T {
    if rho == T::zero() {
        return T::zero();
    }
    -TiltedRows::new(ch, rho).mass(q).ln()
}

/// Gallager's function for a fixed input distribution.
pub fn gallager_e0<T: Real>(ch: &Channel<T>, rho: T, q: &InputDist<T>) -> Result<T> {
    if !(rho >= T::zero()) {
        return Err(Error::OutOfRange { what: "rho", value: rho.to_f64_lossy(), range: "[0, inf)" });
    }
    if q.len() != ch.inputs() {
        return Err(Error::DimensionMismatch { expected: ch.inputs(), found: q.len() });
    }
    Ok(e0_raw(ch, rho, q.as_slice()))
}

/// `max_q E0(rho, q)`.
///
/// Symmetric channels take the uniform distribution directly. Otherwise the
/// convex mass `sum_y [...]^{1+rho}` is minimized over the simplex.
pub fn e0_max<T: Real>(ch: &Channel<T>, rho: T) -> ExponentValue<T> {
    e0_max_with(ch, rho, ch.is_symmetric())
}

pub(crate) fn e0_max_with<T: Real>(ch: &Channel<T>, rho: T, symmetric: bool) -> ExponentValue<T> {
    let k = ch.inputs();
    if symmetric || rho == T::zero() {
        let q = InputDist::uniform(k);
        let value = e0_raw(ch, rho, q.as_slice());
        return ExponentValue { value, param: Some(rho), q: Some(q), flags: Vec::new() };
    }
    let tilted = TiltedRows::new(ch, rho);
    let best = minimize_on_simplex(|q: &[T]| tilted.mass(q), k, T::tol(E0_Q_TOL));
    let mut flags = Vec::new();
    if !best.converged {
        flags.push(super::Flag::NoConvergence);
    }
    ExponentValue {
        value: -best.value.ln(),
        param: Some(rho),
        q: Some(InputDist::from_simplex_point(best.point)),
        flags,
    }
}
