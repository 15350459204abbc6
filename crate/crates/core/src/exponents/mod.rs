//! Reliability bounds built on Gallager's `E0`: sphere-packing, random-coding,
//! list-decoding, the focusing bound for feedback with delay, and the
//! exponent `E'` achieved by the chunked flow-control scheme.
//!
//! All values are in nats per channel use.

mod achieved;
mod bounds;
mod gallager;
mod haroutunian;
mod slopes;

pub use achieved::{achieved_exponent, achieved_exponent_at_rate, overhead_fraction, AchievedPoint};
pub use bounds::{
    bec_feedback_exponent, focusing_bound, focusing_point, list_random_coding, random_coding, sphere_packing, RHO_MAX,
    RHO_MIN,
};
pub use gallager::{e0_max, gallager_e0, E0_Q_TOL};
pub use haroutunian::{haroutunian_oracle, HAROUTUNIAN_MAX_GRID};
pub use slopes::{capacity_slopes, e0_second_derivative, Slopes};

pub(crate) use gallager::{e0_max_with, e0_raw};

use serde::Serialize;

use crate::channel::{capacity, Channel, InputDist};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Channels with capacity below this are rejected by rate-indexed bounds.
pub const DEGENERATE_CAPACITY: f64 = 1e-9;

/// Conditions attached to a result that is still usable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Flag {
    /// Requested rate is at or above capacity; the bound is 0 there.
    RateAboveCapacity,
    /// Requested rate lies beyond the supremum of the parametric rate map.
    RateOutOfRange,
    /// The optimizing parameter sits on the upper edge of the search bracket.
    UpperBracketEdge,
    /// The objective keeps growing at the bracket edge; value is `+inf`.
    Unbounded,
    /// Non-symmetric focusing bound evaluated with sphere-packing in place of
    /// the Haroutunian exponent.
    Surrogate,
    /// An inner optimizer stopped at its iteration cap.
    NoConvergence,
    /// `E0''(0)` vanishes; slopes at capacity are infinite.
    FlatSecondDerivative,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::RateAboveCapacity => "rate_above_capacity",
            Flag::RateOutOfRange => "rate_out_of_range",
            Flag::UpperBracketEdge => "upper_bracket_edge",
            Flag::Unbounded => "unbounded",
            Flag::Surrogate => "surrogate",
            Flag::NoConvergence => "no_convergence",
            Flag::FlatSecondDerivative => "flat_second_derivative",
        }
    }
}

/// A bound evaluated at one point, with the parameter that achieves it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentValue<T> {
    /// Nats per channel use; `+inf` when unbounded.
    pub value: T,
    /// Optimizing `rho`, `eta` or `lambda`, when there is one.
    pub param: Option<T>,
    pub q: Option<InputDist<T>>,
    pub flags: Vec<Flag>,
}

impl<T: Real> ExponentValue<T> {
    pub(crate) fn zero(flags: Vec<Flag>) -> Self {
        Self { value: T::zero(), param: None, q: None, flags }
    }

    pub fn has(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }
}

/// One point of a parametric curve, `rate = exponent / rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricPoint<T> {
    pub rho: T,
    pub rate: T,
    pub exponent: T,
}

/// Checks a rate argument and returns the channel capacity.
pub(crate) fn rate_guard<T: Real>(ch: &Channel<T>, rate: T) -> Result<T> {
    if !(rate > T::zero()) {
        return Err(Error::NonPositiveRate(rate.to_f64_lossy()));
    }
    nondegenerate_capacity(ch)
}

pub(crate) fn nondegenerate_capacity<T: Real>(ch: &Channel<T>) -> Result<T> {
    let c = capacity(ch).value;
    if c < T::lit(DEGENERATE_CAPACITY) {
        return Err(Error::DegenerateChannel { capacity: c.to_f64_lossy() });
    }
    Ok(c)
}
