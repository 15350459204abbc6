use thiserror::Error;

/// Errors raised by the library.
///
/// Conditions that still have a meaningful value (rate above capacity,
/// optimizer hitting its bracket, flat second derivative, ...) are not errors;
/// they come back as [`crate::Flag`]s on the result.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transition matrix is empty")]
    EmptyMatrix,

    #[error("transition matrix is ragged: row {row} has {found} entries, expected {expected}")]
    RaggedMatrix { row: usize, expected: usize, found: usize },

    #[error("row {row} sums to {sum}, not 1")]
    NonStochastic { row: usize, sum: f64 },

    #[error("negative or non-finite entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("a channel needs at least two input and two output letters, got {inputs}x{outputs}")]
    TooFewLetters { inputs: usize, outputs: usize },

    #[error("{what} = {value} is outside {range}")]
    OutOfRange { what: &'static str, value: f64, range: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("probability vector sums to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),

    #[error("list size must be a positive integer, got {0}")]
    BadListSize(usize),

    #[error("unsupported alphabet for this routine: {inputs} inputs x {outputs} outputs")]
    UnsupportedAlphabet { inputs: usize, outputs: usize },

    #[error("channel is degenerate (capacity {capacity} below 1e-9 nats or E0(1) = 0)")]
    DegenerateChannel { capacity: f64 },

    #[error("channel is not symmetric; this routine needs a symmetric channel")]
    NotSymmetric,

    #[error("table is empty")]
    EmptyTable,

    #[error("horizon {horizon} too short, need at least {required} channel uses")]
    HorizonTooShort { horizon: u64, required: u64 },

    #[error("need at least 3 delays with nonzero error estimates, have {found}")]
    TooFewPoints { found: usize },

    #[error("every delay has zero estimated error")]
    AllZeroErrors,

    #[error("block payload of {bits} bits exceeds the exhaustive-decoding cap of {max}")]
    PayloadTooLarge { bits: u32, max: u32 },

    #[error("flow re-decode window spans {bits} bits of hypotheses, cap is {max}")]
    WindowTooLarge { bits: u32, max: u32 },

    #[error("invalid scheme configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid sweep request: {0}")]
    InvalidSweep(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
