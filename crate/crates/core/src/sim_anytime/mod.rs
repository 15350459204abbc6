//! Closed-loop simulation of the chunked feedback schemes.
//!
//! Time is split into chunks of `c` channel uses. The first `c - theta` uses
//! of a chunk carry data; the last `theta` carry punctuation. Incoming bits
//! are grouped into blocks of `floor(n c R)` bits (`R` in bits per use); the
//! block in flight is sent as a prefix of an infinite random codeword. At the
//! end of each chunk's data part the encoder, which sees every channel output
//! through feedback, list-decodes the block as the decoder would and sends
//! either a deny or a confirm with the block's list position.
//!
//! [`fortified_run`] delivers that punctuation perfectly. [`synthesized_run`]
//! sends it with a random tree code on the `theta` flow uses, and the decoder
//! re-parses the data stream under its current punctuation estimate at every
//! chunk. Deadline accounting matches [`crate::sim_queue`]: a bit not decoded
//! at its deadline counts as half an error.

mod codebook;
mod engine;
mod flow;

pub use codebook::{list_decode_block, Codebook, MAX_PAYLOAD_BITS};
pub use engine::{data_input_distribution, BitOutcome, Outcome, RunOptions, RunReport, RunStats, IDLE_LETTER};
pub use flow::{flow_decode, flow_encode, FlowCode, FlowDecoder, FlowMessage, MAX_WINDOW_BITS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim_queue::DelayErrorTable;
use crate::Channel;

fn default_window() -> u32 {
    4
}

/// Parameters of an `(n, c, l, theta)` scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    /// Block length in chunks.
    pub n: u32,
    /// Chunk length in channel uses.
    pub c: u32,
    /// List size is `2^l`.
    pub l: u32,
    /// Flow-control uses per chunk; 0 means an ideal side link.
    #[serde(default)]
    pub theta: u32,
    /// Arrival rate in bits per channel use.
    pub rate_bits: f64,
    /// Seeds the data codebook and the flow tree code.
    #[serde(default)]
    pub seed: u64,
    /// Chunks of punctuation re-decoded at every chunk.
    #[serde(default = "default_window")]
    pub redecode_window: u32,
}

impl SchemeConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: SchemeConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn rate_nats(&self) -> f64 {
        self.rate_bits * std::f64::consts::LN_2
    }

    /// `floor(n c R)` with `R` in bits per use.
    pub fn payload_bits(&self) -> u32 {
        (self.n as f64 * self.c as f64 * self.rate_bits + 1e-9).floor() as u32
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.c == 0 {
            return bad("c must be at least 1".into());
        }
        if self.n <= self.l {
            return bad(format!("need n > l, got n={} l={}", self.n, self.l));
        }
        if self.theta >= self.c {
            return bad(format!("need theta < c, got theta={} c={}", self.theta, self.c));
        }
        if !(self.rate_bits > 0.0 && self.rate_bits.is_finite()) {
            return bad(format!("rate_bits must be positive, got {}", self.rate_bits));
        }
        let k = self.payload_bits();
        if k == 0 {
            return bad("block payload n*c*rate_bits is below one bit".into());
        }
        if k > MAX_PAYLOAD_BITS {
            return Err(Error::PayloadTooLarge { bits: k, max: MAX_PAYLOAD_BITS });
        }
        if self.l > k {
            return bad(format!("list exponent l={} exceeds the {k}-bit payload", self.l));
        }
        if self.theta > 0 {
            flow::check_window(self.redecode_window, self.l)?;
        }
        Ok(())
    }
}

fn check_outputs(ch: &Channel) -> Result<()> {
    if ch.outputs() > 256 {
        return Err(Error::InvalidConfig("simulation supports at most 256 channel outputs".into()));
    }
    Ok(())
}

/// Runs the scheme with punctuation delivered perfectly at each chunk end.
/// With `theta > 0` the flow uses are still spent (idle on the channel).
pub fn fortified_run(
    cfg: &SchemeConfig,
    ch: &Channel,
    horizon: u64,
    delays: &[u64],
    seed: u64,
) -> Result<DelayErrorTable> {
    fortified_run_report(cfg, ch, horizon, delays, seed, &RunOptions::default()).map(|r| r.table)
}

pub fn fortified_run_report(
    cfg: &SchemeConfig,
    ch: &Channel,
    horizon: u64,
    delays: &[u64],
    seed: u64,
    opts: &RunOptions,
) -> Result<RunReport> {
    check_outputs(ch)?;
    engine::run(cfg, ch, horizon, delays, seed, opts, false)
}

/// Runs the scheme with punctuation carried by a tree code on the `theta`
/// flow uses of each chunk (`theta >= 1`). `seed` drives channel noise and
/// the data bits; `cfg.seed` the codes.
pub fn synthesized_run(
    cfg: &SchemeConfig,
    ch: &Channel,
    horizon: u64,
    delays: &[u64],
    seed: u64,
) -> Result<DelayErrorTable> {
    synthesized_run_report(cfg, ch, horizon, delays, seed, &RunOptions::default()).map(|r| r.table)
}

pub fn synthesized_run_report(
    cfg: &SchemeConfig,
    ch: &Channel,
    horizon: u64,
    delays: &[u64],
    seed: u64,
    opts: &RunOptions,
) -> Result<RunReport> {
    if cfg.theta == 0 {
        return Err(Error::InvalidConfig("synthesized flow control needs theta >= 1".into()));
    }
    check_outputs(ch)?;
    engine::run(cfg, ch, horizon, delays, seed, opts, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, c: u32, l: u32, theta: u32, rate_bits: f64) -> SchemeConfig {
        SchemeConfig { n, c, l, theta, rate_bits, seed: 1, redecode_window: 4 }
    }

    #[test]
    fn config_json_and_validation() {
        let c = SchemeConfig::from_json_str(
            r#"{"n":2,"c":16,"l":1,"theta":4,"rate_bits":0.2,"seed":3,"redecode_window":6}"#,
        )
        .unwrap();
        assert_eq!(c.payload_bits(), 6);
        assert!(SchemeConfig::from_json_str(r#"{"n":1,"c":2,"l":0,"rate_bits":0.5}"#).is_ok());
        assert!(SchemeConfig::from_json_str(r#"{"n":1,"c":2,"l":1,"rate_bits":0.5}"#).is_err());
        assert!(cfg(2, 4, 0, 4, 0.5).validate().is_err());
        assert!(matches!(cfg(4, 8, 0, 0, 0.5).validate(), Err(Error::PayloadTooLarge { .. })));
        assert!(cfg(3, 8, 2, 2, 0.25).validate().is_ok());
        assert!(matches!(cfg(9, 8, 8, 2, 0.2).validate(), Err(Error::WindowTooLarge { .. })));
        let mut wide = cfg(4, 8, 2, 2, 0.25);
        wide.redecode_window = 9;
        assert!(matches!(wide.validate(), Err(Error::WindowTooLarge { .. })));
    }

    #[test]
    fn noiseless_channel_has_no_late_errors() {
        let ch = Channel::noiseless(2).unwrap();
        // n = 2 leaves room to catch up after a deny; n = 1 would not.
        let c = cfg(2, 8, 0, 0, 0.5);
        let t = fortified_run(&c, &ch, 40_000, &[0, 64, 128], 5).unwrap();
        assert!(t.rows[0].error > 0.0);
        assert_eq!(t.rows[1].error, 0.0);
        assert_eq!(t.rows[2].error, 0.0);
    }

    #[test]
    fn fortified_queue_beliefs_agree() {
        let ch = Channel::bsc(0.05).unwrap();
        let c = cfg(2, 16, 1, 0, 0.2);
        let r = fortified_run_report(&c, &ch, 20_000, &[16, 48], 2, &RunOptions::default()).unwrap();
        assert_eq!(r.stats.queue_mismatch_chunks, 0);
        assert_eq!(r.stats.punctuation_errors, 0);
        assert!(r.stats.confirms > 0);
    }

    #[test]
    fn runs_repeat_under_same_seeds() {
        let ch = Channel::bsc(0.05).unwrap();
        let c = cfg(2, 16, 1, 4, 0.15);
        let a = synthesized_run(&c, &ch, 10_000, &[32, 64], 8).unwrap();
        let b = synthesized_run(&c, &ch, 10_000, &[32, 64], 8).unwrap();
        assert_eq!(a, b);
        let d = synthesized_run(&c, &ch, 10_000, &[32, 64], 9).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn noiseless_flow_override_matches_fortified() {
        let ch = Channel::bsc(0.05).unwrap();
        let c = cfg(2, 16, 1, 4, 0.15);
        let opts = RunOptions { noiseless_flow: true, ..RunOptions::default() };
        let s = synthesized_run_report(&c, &ch, 10_000, &[32, 64], 4, &opts).unwrap();
        let f = fortified_run(&c, &ch, 10_000, &[32, 64], 4).unwrap();
        assert_eq!(s.table, f);
        assert_eq!(s.stats.punctuation_errors, 0);
    }

    #[test]
    fn theta_zero_is_rejected_for_synthesized() {
        let ch = Channel::bsc(0.05).unwrap();
        assert!(synthesized_run(&cfg(2, 16, 1, 0, 0.15), &ch, 10_000, &[32], 1).is_err());
    }
}
