use crate::channel::{Channel, InputDist};
use crate::error::{Error, Result};
use crate::optim::{bisect_decreasing, golden_section_max, BISECT_FTOL, BISECT_XTOL, GOLDEN_TOL};
use crate::scalar::Real;

use super::{e0_max_with, e0_raw, rate_guard, ExponentValue, Flag, ParametricPoint};

/// Lower edge of every `rho` search.
pub const RHO_MIN: f64 = 1e-6;
/// Upper edge of every `rho` search. `E0` has saturated well before this for
/// channels without zero-error capacity.
pub const RHO_MAX: f64 = 64.0;

/// `max_{RHO_MIN <= rho <= hi} E0_max(rho) - rho * rate`.
///
/// With `edge_is_artificial`, a maximizer on the upper edge is flagged, and
/// if `E0` is still growing linearly there the result is `+inf`.
fn max_over_rho<T: Real>(ch: &Channel<T>, rate: T, hi: T, edge_is_artificial: bool) -> ExponentValue<T> {
    let sym = ch.is_symmetric();
    let objective = |rho: T| e0_max_with(ch, rho, sym).value - rho * rate;
    let (rho, _) = golden_section_max(objective, T::lit(RHO_MIN), hi, T::tol(GOLDEN_TOL));
    let at_rho = e0_max_with(ch, rho, sym);
    let mut flags = at_rho.flags;
    let mut value = (at_rho.value - rho * rate).max(T::zero());

    if edge_is_artificial && rho >= hi - T::tol(GOLDEN_TOL) {
        flags.push(Flag::UpperBracketEdge);
        let half = hi / T::lit(2.0);
        let e_half = e0_max_with(ch, half, sym).value;
        let e_hi = e0_max_with(ch, hi, sym).value;
        let edge_slope = (e_hi - e_half) / (hi - half);
        let mean_slope = e_half / half;
        if edge_slope > rate && edge_slope >= mean_slope / T::lit(2.0) {
            flags.push(Flag::Unbounded);
            value = T::infinity();
        }
    }
    ExponentValue { value, param: Some(rho), q: at_rho.q, flags }
}

/// Sphere-packing exponent `E_sp(R) = sup_{rho > 0} E0(rho) - rho R`.
///
/// The supremum is taken over `[RHO_MIN, RHO_MAX]`. A maximizer on the upper
/// edge carries [`Flag::UpperBracketEdge`]; an objective still rising there
/// returns `+inf` with [`Flag::Unbounded`].
pub fn sphere_packing<T: Real>(ch: &Channel<T>, rate: T) -> Result<ExponentValue<T>> {
    let c = rate_guard(ch, rate)?;
    if rate >= c {
        return Ok(ExponentValue::zero(Vec::new()));
    }
    Ok(max_over_rho(ch, rate, T::lit(RHO_MAX), true))
}

/// Random-coding exponent, `rho` restricted to `(0, 1]`.
pub fn random_coding<T: Real>(ch: &Channel<T>, rate: T) -> Result<ExponentValue<T>> {
    let c = rate_guard(ch, rate)?;
    if rate >= c {
        return Ok(ExponentValue::zero(Vec::new()));
    }
    Ok(max_over_rho(ch, rate, T::one(), false))
}

/// Random-coding exponent for list decoding with list size `list`, `rho`
/// restricted to `(0, list]`. Lists longer than [`RHO_MAX`] use that bracket.
pub fn list_random_coding<T: Real>(ch: &Channel<T>, rate: T, list: usize) -> Result<ExponentValue<T>> {
    if list == 0 {
        return Err(Error::BadListSize(list));
    }
    let c = rate_guard(ch, rate)?;
    if rate >= c {
        return Ok(ExponentValue::zero(Vec::new()));
    }
    let clamped = list as f64 > RHO_MAX;
    let hi = T::lit((list as f64).min(RHO_MAX));
    Ok(max_over_rho(ch, rate, hi, clamped))
}

/// The focusing-bound point at parameter `eta`: exponent `E0(eta)`, rate
/// `E0(eta) / eta`.
pub fn focusing_point<T: Real>(ch: &Channel<T>, eta: T) -> Result<ParametricPoint<T>> {
    if !(eta > T::zero()) {
        return Err(Error::OutOfRange { what: "eta", value: eta.to_f64_lossy(), range: "(0, inf)" });
    }
    let exponent = super::e0_max(ch, eta).value;
    Ok(ParametricPoint { rho: eta, rate: exponent / eta, exponent })
}

/// Upper bound on the fixed-delay exponent with feedback at `rate`.
///
/// Symmetric channels solve `E0(eta)/eta = rate` for `eta` and return
/// `E0(eta)`. Other channels evaluate `inf_{0<lambda<1} E(lambda R)/(1-lambda)`
/// with sphere-packing standing in for the Haroutunian exponent, flagged
/// [`Flag::Surrogate`].
pub fn focusing_bound<T: Real>(ch: &Channel<T>, rate: T) -> Result<ExponentValue<T>> {
    let c = rate_guard(ch, rate)?;
    if rate >= c {
        return Ok(ExponentValue::zero(vec![Flag::RateAboveCapacity]));
    }
    if ch.is_symmetric() {
        Ok(focusing_symmetric(ch, rate))
    } else {
        focusing_general(ch, rate)
    }
}

fn focusing_symmetric<T: Real>(ch: &Channel<T>, rate: T) -> ExponentValue<T> {
    let q = InputDist::uniform(ch.inputs());
    let per_eta = |eta: T| e0_raw(ch, eta, q.as_slice()) / eta;

    let lo = T::lit(1e-12);
    let mut hi = T::one();
    let cap = T::lit(2f64.powi(40));
    while per_eta(hi) >= rate {
        if hi >= cap {
            // E0 grows linearly forever: zero-error transmission at this rate.
            return ExponentValue { value: T::infinity(), param: None, q: Some(q), flags: vec![Flag::Unbounded] };
        }
        hi = hi * T::lit(2.0);
    }
    let eta = bisect_decreasing(per_eta, rate, lo, hi, T::tol(BISECT_XTOL), T::tol(BISECT_FTOL));
    let value = e0_raw(ch, eta, q.as_slice());
    ExponentValue { value, param: Some(eta), q: Some(q), flags: Vec::new() }
}

fn focusing_general<T: Real>(ch: &Channel<T>, rate: T) -> Result<ExponentValue<T>> {
    let eps = T::lit(1e-9);
    let ratio = |lambda: T| -> T {
        match super::sphere_packing(ch, lambda * rate) {
            Ok(v) => v.value / (T::one() - lambda),
            Err(_) => T::infinity(),
        }
    };
    let (lambda, neg) = golden_section_max(|l| -ratio(l), eps, T::one() - eps, T::tol(GOLDEN_TOL));
    let value = -neg;
    let mut flags = vec![Flag::Surrogate];
    if value.is_infinite() {
        flags.push(Flag::Unbounded);
    }
    let q = super::sphere_packing(ch, lambda * rate)?.q;
    Ok(ExponentValue { value, param: Some(lambda), q, flags })
}

/// `ln((1 - delta) / delta)`: the delay exponent of the BEC with feedback and
/// the repeat-until-received scheme at half a bit per use.
pub fn bec_feedback_exponent<T: Real>(delta: T) -> Result<T> {
    if !(delta > T::zero() && delta < T::lit(0.5)) {
        return Err(Error::OutOfRange { what: "erasure probability", value: delta.to_f64_lossy(), range: "(0, 0.5)" });
    }
    Ok((T::one() - delta).ln() - delta.ln())
}
