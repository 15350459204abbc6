use std::path::PathBuf;

use clap::Args;
use delayrel::{capacity_slopes, crossover, emit_csv, emit_plot_script, sweep, BoundKind, Error, Flag, Unit};

use crate::failure::Failure;
use crate::manifest::Outputs;
use crate::{fmt9, ChannelArgs, UnitArg};

#[derive(Args)]
pub struct FigureArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Number of rates, evenly spaced from 0.01 C to 0.999 C.
    #[arg(long, default_value_t = 128)]
    points: usize,
    /// Output directory.
    #[arg(long, env = "DELAYREL_OUT", default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = UnitArg::Nats)]
    unit: UnitArg,
}

const CURVES: [BoundKind; 3] = [BoundKind::SpherePacking, BoundKind::Focusing, BoundKind::Achieved];

pub fn run(a: &FigureArgs) -> Result<i32, Failure> {
    let (ch, label) = a.channel.build()?;
    if !ch.is_symmetric() {
        return Err(Error::NotSymmetric.into());
    }
    let slopes = capacity_slopes(&ch)?;
    let c = slopes.capacity;
    let unit: Unit = a.unit.into();
    let k = unit.per_nat();

    let mut table = sweep(&ch, &label, 0.01 * c, 0.999 * c, a.points, &CURVES)?;
    table.unit = unit;
    let mut out = Outputs::new(&a.out)?;
    let csv_path = out.write("figure.csv", &emit_csv(&table)?)?;
    let script = emit_plot_script(&table, &csv_path.display().to_string())?;
    out.write("figure.gp", &script)?;

    println!("channel: {label}");
    println!("capacity: {} {}", fmt9(c * k), unit.as_str());
    match crossover(&table) {
        Some(x) => {
            println!("crossover: {} {} (achieved exceeds sp from here up to capacity)", fmt9(x.rate * k), unit.as_str())
        }
        None => println!("crossover: none"),
    }
    // Slopes are exponent per rate, so they carry no unit.
    println!("focusing slope at capacity: {}", fmt9(slopes.focusing));
    println!("achieved slope at capacity: {}", fmt9(slopes.achieved));
    println!("E0''(0): {}", fmt9(slopes.e0_second * k));
    if slopes.flags.contains(&Flag::FlatSecondDerivative) {
        println!("flags: {} (the bounds meet capacity along a straight line)", Flag::FlatSecondDerivative.as_str());
    }
    let manifest = out.finish(Vec::new())?;
    println!("wrote {}", manifest.display());
    Ok(0)
}
