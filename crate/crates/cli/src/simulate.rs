use std::path::PathBuf;

use clap::{Args, Subcommand};
use delayrel::sim_anytime::{fortified_run_report, synthesized_run_report, RunOptions, RunReport};
use delayrel::sim_queue::simulate_bec_feedback_replicas;
use delayrel::{bec_feedback_exponent, fit_exponent, simulate_bec_feedback, DelayErrorTable, SchemeConfig, Unit};

use crate::failure::{Failure, NUMERICAL};
use crate::manifest::Outputs;
use crate::{fmt9, ChannelArgs, UnitArg};

#[derive(Args)]
pub struct SimulateArgs {
    #[command(subcommand)]
    scheme: Scheme,
}

#[derive(Args)]
struct Common {
    /// Channel uses per run.
    #[arg(long)]
    horizon: u64,
    /// Comma-separated delays in channel uses.
    #[arg(long, value_delimiter = ',', required = true)]
    delays: Vec<u64>,
    /// Seeds the channel noise (and the data bits).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, env = "DELAYREL_OUT", default_value = ".")]
    out: PathBuf,
    /// Unit of the fitted slope and reference exponent.
    #[arg(long, value_enum, default_value_t = UnitArg::Nats)]
    unit: UnitArg,
}

#[derive(Subcommand)]
enum Scheme {
    /// Repeat-until-received over a BEC at half a bit per use.
    BecQueue {
        #[arg(long)]
        delta: f64,
        /// Independent runs pooled together, seeded from --seed.
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        #[command(flatten)]
        common: Common,
    },
    /// List-decoding scheme with ideal flow control.
    Fortified {
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// List-decoding scheme with tree-coded flow control.
    Synthesized {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Deliver punctuation perfectly while still spending its uses.
        #[arg(long)]
        noiseless_flow: bool,
    },
}

#[derive(Args)]
struct SchemeArgs {
    /// JSON scheme configuration.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    channel: ChannelArgs,
    #[command(flatten)]
    common: Common,
}

impl SchemeArgs {
    fn load(&self) -> Result<SchemeConfig, Failure> {
        let text = std::fs::read_to_string(&self.config).map_err(|e| Failure::io(&self.config, e))?;
        SchemeConfig::from_json_str(&text).map_err(|e| Failure::input(format!("{}: {e}", self.config.display())))
    }
}

fn print_table(t: &DelayErrorTable) {
    println!("delay  error            95% half-width   trials");
    for r in &t.rows {
        println!("{:<6} {:<16.9e} {:<16.9e} {}", r.delay, r.error, r.half_width, r.trials);
    }
}

/// Writes the table and manifest, then prints the fit. A failed fit exits
/// with the numerical status once the table is safely on disk.
fn report(
    name: &str,
    t: &DelayErrorTable,
    reference: Option<f64>,
    c: &Common,
    seeds: Vec<u64>,
) -> Result<i32, Failure> {
    let unit: Unit = c.unit.into();
    let k = unit.per_nat();
    let mut out = Outputs::new(&c.out)?;
    let path = out.write(&format!("{name}.csv"), &t.to_csv())?;
    out.finish(seeds)?;
    print_table(t);
    println!("table: {}", path.display());
    let code = match fit_exponent(t) {
        Ok(f) => {
            println!("fitted slope: {} {} per channel use", fmt9(f.slope * k), unit.as_str());
            println!("r squared: {}", fmt9(f.r_squared));
            if !f.excluded.is_empty() {
                let ex: Vec<String> = f.excluded.iter().map(u64::to_string).collect();
                println!("excluded delays (no errors seen): {}", ex.join(","));
            }
            0
        }
        Err(e) => {
            eprintln!("fit failed: {e}");
            NUMERICAL
        }
    };
    match reference {
        Some(r) => println!("reference exponent: {} {} per channel use", fmt9(r * k), unit.as_str()),
        None => println!("reference exponent: none"),
    }
    Ok(code)
}

fn print_stats(r: &RunReport) {
    let s = &r.stats;
    println!(
        "chunks {} blocks {} confirms {} denies {} max queue {} bits",
        s.chunks, s.blocks_started, s.confirms, s.denies, s.max_queue_bits
    );
    println!(
        "errors under correct punctuation {} under wrong punctuation {} (frozen wrong messages {}, queue mismatches {})",
        s.data_errors, s.punctuation_errors, s.frozen_punctuation_errors, s.queue_mismatch_chunks
    );
}

pub fn run(a: &SimulateArgs) -> Result<i32, Failure> {
    match &a.scheme {
        Scheme::BecQueue { delta, replicas, common } => {
            let t = if *replicas == 1 {
                simulate_bec_feedback(*delta, common.horizon, &common.delays, common.seed)?
            } else {
                simulate_bec_feedback_replicas(*delta, common.horizon, &common.delays, common.seed, *replicas)?
            };
            let reference = bec_feedback_exponent(*delta).ok();
            report("bec_queue", &t, reference, common, vec![common.seed])
        }
        Scheme::Fortified { scheme } => {
            let cfg = scheme.load()?;
            let (ch, label) = scheme.channel.build()?;
            let c = &scheme.common;
            let r = fortified_run_report(&cfg, &ch, c.horizon, &c.delays, c.seed, &RunOptions::default())?;
            println!("channel: {label}, block payload {} bits", cfg.payload_bits());
            print_stats(&r);
            report("fortified", &r.table, None, c, vec![c.seed, cfg.seed])
        }
        Scheme::Synthesized { scheme, noiseless_flow } => {
            let cfg = scheme.load()?;
            let (ch, label) = scheme.channel.build()?;
            let c = &scheme.common;
            let opts = RunOptions { noiseless_flow: *noiseless_flow, ..RunOptions::default() };
            let r = synthesized_run_report(&cfg, &ch, c.horizon, &c.delays, c.seed, &opts)?;
            println!("channel: {label}, block payload {} bits", cfg.payload_bits());
            print_stats(&r);
            report("synthesized", &r.table, None, c, vec![c.seed, cfg.seed])
        }
    }
}
