//! Fixed-delay reliability of discrete memoryless channels with feedback.
//!
//! - [`channel`]: transition matrices, mutual information, capacity.
//! - [`exponents`]: `E0`, sphere-packing, random-coding and list exponents,
//!   the focusing bound, the achieved exponent `E'`, near-capacity slopes.
//! - [`curves`]: rate sweeps with CSV and gnuplot output.
//! - [`sim_queue`]: the BEC repeat-until-received scheme and its queue.
//! - [`sim_anytime`]: the chunked list-decoding schemes with ideal or
//!   tree-coded flow control.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`). The aliases at
//! the crate root fix `f64`, which is what the curve and simulation code use.

// `!(x > 0)` is how NaN gets rejected along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod curves;
pub mod error;
pub mod exponents;
pub mod optim;
pub mod rng;
pub mod scalar;
pub mod sim_anytime;
pub mod sim_queue;

pub use error::{Error, Result};
pub use exponents::Flag;
pub use scalar::Real;

pub use channel::{capacity, conditional_divergence, mutual_information};
pub use curves::{crossover, emit_csv, emit_plot_script, sweep, BoundKind, CurveTable, Unit};
pub use exponents::{
    achieved_exponent, achieved_exponent_at_rate, bec_feedback_exponent, capacity_slopes, e0_max, focusing_bound,
    focusing_point, gallager_e0, haroutunian_oracle, list_random_coding, overhead_fraction, random_coding,
    sphere_packing,
};
pub use sim_anytime::{fortified_run, synthesized_run, FlowMessage, SchemeConfig};
pub use sim_queue::{fit_exponent, simulate_bec_feedback, DelayErrorTable, ExponentFit};

pub type Channel = channel::Channel<f64>;
pub type InputDist = channel::InputDist<f64>;
pub type Capacity = channel::Capacity<f64>;
pub type ExponentValue = exponents::ExponentValue<f64>;
pub type ParametricPoint = exponents::ParametricPoint<f64>;
pub type AchievedPoint = exponents::AchievedPoint<f64>;
pub type Slopes = exponents::Slopes<f64>;

pub type ChannelF32 = channel::Channel<f32>;
pub type InputDistF32 = channel::InputDist<f32>;
pub type ExponentValueF32 = exponents::ExponentValue<f32>;
