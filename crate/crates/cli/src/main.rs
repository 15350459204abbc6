//! `delayrel`: evaluate reliability bounds, draw exponent curves and run the
//! feedback-scheme simulators.

mod exponent;
mod failure;
mod figure;
mod manifest;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use delayrel::{Channel, Unit};

use failure::Failure;

#[derive(Parser)]
#[command(name = "delayrel", version, about = "Fixed-delay reliability bounds and feedback-scheme simulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one bound at one rate (or one rho).
    Exponent(exponent::ExponentArgs),
    /// Sweep sphere-packing, focusing and achieved exponents up to capacity.
    Figure(figure::FigureArgs),
    /// Run a Monte-Carlo simulation and fit its delay exponent.
    Simulate(simulate::SimulateArgs),
}

/// Exactly one of `--bsc`, `--bec`, `--matrix`.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct ChannelArgs {
    /// Binary symmetric channel with this crossover probability.
    #[arg(long, value_name = "DELTA")]
    bsc: Option<f64>,
    /// Binary erasure channel with this erasure probability.
    #[arg(long, value_name = "DELTA")]
    bec: Option<f64>,
    /// JSON file holding {"matrix": [[p(y|x) ...], ...]}.
    #[arg(long, value_name = "FILE")]
    matrix: Option<PathBuf>,
}

impl ChannelArgs {
    pub fn build(&self) -> Result<(Channel, String), Failure> {
        if let Some(d) = self.bsc {
            return Ok((Channel::bsc(d)?, format!("bsc {d}")));
        }
        if let Some(d) = self.bec {
            return Ok((Channel::bec(d)?, format!("bec {d}")));
        }
        let path = self.matrix.as_ref().expect("clap enforces one channel flag");
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let ch = Channel::from_json_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        Ok((ch, format!("matrix {}", path.display())))
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Default)]
pub enum UnitArg {
    #[default]
    Nats,
    Bits,
}

impl From<UnitArg> for Unit {
    fn from(u: UnitArg) -> Unit {
        match u {
            UnitArg::Nats => Unit::Nats,
            UnitArg::Bits => Unit::Bits,
        }
    }
}

/// `{:.9}`, with `inf` spelled out.
pub fn fmt9(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.9}")
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Exponent(a) => exponent::run(a),
        Command::Figure(a) => figure::run(a),
        Command::Simulate(a) => simulate::run(a),
    };
    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
