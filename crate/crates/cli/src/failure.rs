use std::fmt;
use std::path::Path;

use delayrel::{Error, Flag};

/// Exit statuses. Anything not listed exits 1 (clap usage errors exit 2 on
/// their own, which matches `INPUT`).
pub const INPUT: i32 = 2;
pub const DOMAIN: i32 = 3;
pub const NUMERICAL: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: INPUT, message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::input(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DegenerateChannel { .. } | Error::NotSymmetric | Error::EmptyTable => DOMAIN,
        Error::TooFewPoints { .. } | Error::AllZeroErrors => NUMERICAL,
        _ => INPUT,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

/// Exit status implied by the flags on a printed value, if any.
pub fn flag_code(flags: &[Flag]) -> Option<i32> {
    if flags.iter().any(|f| matches!(f, Flag::RateAboveCapacity | Flag::RateOutOfRange)) {
        Some(DOMAIN)
    } else if flags.iter().any(|f| matches!(f, Flag::NoConvergence | Flag::UpperBracketEdge)) {
        Some(NUMERICAL)
    } else {
        None
    }
}
