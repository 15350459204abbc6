//! Rate sweeps of the exponent bounds, with CSV and gnuplot output.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::capacity;
use crate::error::{Error, Result};
use crate::exponents::{
    achieved_exponent_at_rate, focusing_bound, list_random_coding, random_coding, sphere_packing, Flag,
    DEGENERATE_CAPACITY,
};
use crate::{Channel, ExponentValue};

/// A bound that can be swept over rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    SpherePacking,
    RandomCoding,
    /// List decoding with the given list size.
    List(usize),
    Focusing,
    Achieved,
}

impl BoundKind {
    /// Column name in CSV output: `sp`, `er`, `list4`, `focusing`, `achieved`.
    pub fn name(&self) -> String {
        match self {
            BoundKind::SpherePacking => "sp".into(),
            BoundKind::RandomCoding => "er".into(),
            BoundKind::List(l) => format!("list{l}"),
            BoundKind::Focusing => "focusing".into(),
            BoundKind::Achieved => "achieved".into(),
        }
    }

    pub fn evaluate(&self, ch: &Channel, rate: f64) -> Result<ExponentValue> {
        match *self {
            BoundKind::SpherePacking => sphere_packing(ch, rate),
            BoundKind::RandomCoding => random_coding(ch, rate),
            BoundKind::List(l) => list_random_coding(ch, rate, l),
            BoundKind::Focusing => focusing_bound(ch, rate),
            BoundKind::Achieved => achieved_exponent_at_rate(ch, rate),
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    /// Accepts the column names plus `list:<l>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sp" => Ok(BoundKind::SpherePacking),
            "er" => Ok(BoundKind::RandomCoding),
            "focusing" => Ok(BoundKind::Focusing),
            "achieved" => Ok(BoundKind::Achieved),
            _ => {
                let digits = s.strip_prefix("list:").or_else(|| s.strip_prefix("list"));
                match digits.map(str::parse::<usize>) {
                    Some(Ok(l)) if l >= 1 => Ok(BoundKind::List(l)),
                    Some(Ok(l)) => Err(Error::BadListSize(l)),
                    _ => Err(Error::Parse(format!("unknown bound `{s}`"))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    /// Factor that converts nats into this unit.
    pub fn per_nat(self) -> f64 {
        match self {
            Unit::Nats => 1.0,
            Unit::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nats" => Ok(Unit::Nats),
            "bits" => Ok(Unit::Bits),
            _ => Err(Error::Parse(format!("unknown unit `{s}`"))),
        }
    }
}

/// One bound evaluated at one rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Nats; 0 when the evaluation failed, `+inf` when unbounded.
    pub value: f64,
    pub flags: Vec<Flag>,
    pub error: Option<Error>,
}

impl Cell {
    fn from_result(r: Result<ExponentValue>) -> Self {
        match r {
            Ok(v) => Cell { value: v.value, flags: v.flags, error: None },
            Err(e) => Cell { value: 0.0, flags: Vec::new(), error: Some(e) },
        }
    }

    /// The value if it can be plotted: no error and finite.
    pub fn plottable(&self) -> Option<f64> {
        (self.error.is_none() && self.value.is_finite()).then_some(self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    /// Nats per channel use.
    pub rate: f64,
    /// One cell per entry of [`CurveTable::bounds`].
    pub cells: Vec<Cell>,
}

/// Bounds tabulated over a uniform rate grid. Values are stored in nats;
/// `unit` only affects the emitted text.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    pub channel: String,
    pub unit: Unit,
    /// Nats per channel use.
    pub capacity: f64,
    pub bounds: Vec<BoundKind>,
    pub rows: Vec<CurveRow>,
}

impl CurveTable {
    pub fn column(&self, kind: BoundKind) -> Option<usize> {
        self.bounds.iter().position(|&b| b == kind)
    }
}

fn sweep_grid(ch: &Channel, rate_min: f64, rate_max: f64, points: usize) -> Result<(f64, Vec<f64>)> {
    if points < 2 {
        return Err(Error::InvalidSweep(format!("need at least 2 points, got {points}")));
    }
    if !(rate_min > 0.0 && rate_min < rate_max) {
        return Err(Error::InvalidSweep(format!("need 0 < rate_min < rate_max, got {rate_min}, {rate_max}")));
    }
    let c = capacity(ch).value;
    if c < DEGENERATE_CAPACITY {
        return Err(Error::DegenerateChannel { capacity: c });
    }
    if rate_max > c * (1.0 + 1e-12) {
        return Err(Error::InvalidSweep(format!("rate_max {rate_max} exceeds capacity {c}")));
    }
    let step = (rate_max - rate_min) / (points - 1) as f64;
    let mut rates: Vec<f64> = (0..points).map(|i| rate_min + step * i as f64).collect();
    rates[points - 1] = rate_max;
    Ok((c, rates))
}

fn eval_row(ch: &Channel, bounds: &[BoundKind], rate: f64) -> CurveRow {
    CurveRow { rate, cells: bounds.iter().map(|b| Cell::from_result(b.evaluate(ch, rate))).collect() }
}

/// Evaluates `bounds` on `points` evenly spaced rates from `rate_min` to
/// `rate_max` (both included), in parallel. Per-cell failures are recorded
/// in the cell; only an invalid grid aborts.
pub fn sweep(
    ch: &Channel,
    channel: &str,
    rate_min: f64,
    rate_max: f64,
    points: usize,
    bounds: &[BoundKind],
) -> Result<CurveTable> {
    let (capacity, rates) = sweep_grid(ch, rate_min, rate_max, points)?;
    let rows = rates.into_par_iter().map(|r| eval_row(ch, bounds, r)).collect();
    Ok(CurveTable { channel: channel.to_string(), unit: Unit::Nats, capacity, bounds: bounds.to_vec(), rows })
}

/// Single-threaded [`sweep`]; produces the same table.
pub fn sweep_sequential(
    ch: &Channel,
    channel: &str,
    rate_min: f64,
    rate_max: f64,
    points: usize,
    bounds: &[BoundKind],
) -> Result<CurveTable> {
    let (capacity, rates) = sweep_grid(ch, rate_min, rate_max, points)?;
    let rows = rates.into_iter().map(|r| eval_row(ch, bounds, r)).collect();
    Ok(CurveTable { channel: channel.to_string(), unit: Unit::Nats, capacity, bounds: bounds.to_vec(), rows })
}

/// `rate,<bound>,...` then one line per row with 9 decimals in `t.unit`.
/// Errors and infinite values are left empty.
pub fn emit_csv(t: &CurveTable) -> Result<String> {
    if t.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let k = t.unit.per_nat();
    let mut out = String::from("rate");
    for b in &t.bounds {
        out.push(',');
        out.push_str(&b.name());
    }
    out.push('\n');
    for row in &t.rows {
        let _ = write!(out, "{:.9}", row.rate * k);
        for cell in &row.cells {
            out.push(',');
            if let Some(v) = cell.plottable() {
                let _ = write!(out, "{:.9}", v * k);
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// A gnuplot script drawing every column of the CSV at `csv_path` against
/// rate, with a dashed marker at capacity.
pub fn emit_plot_script(t: &CurveTable, csv_path: &str) -> Result<String> {
    if t.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let unit = t.unit.as_str();
    let cap = t.capacity * t.unit.per_nat();
    let path = csv_path.replace('\'', "''");
    let mut s = String::new();
    let _ = writeln!(s, "# exponent curves for {}", t.channel.replace('\n', " "));
    s.push_str("set datafile separator ','\n");
    s.push_str("set key top right\n");
    let _ = writeln!(s, "set xlabel 'rate ({unit} per channel use)'");
    let _ = writeln!(s, "set ylabel 'exponent ({unit} per channel use)'");
    s.push_str("set yrange [0:*]\n");
    let _ = writeln!(s, "set arrow from {cap:.9}, graph 0 to {cap:.9}, graph 1 nohead dashtype 2");
    let _ = writeln!(s, "set label 'C' at {cap:.9}, graph 0.95 offset 0.5,0");
    for (i, b) in t.bounds.iter().enumerate() {
        let src = if i == 0 { format!("'{path}'") } else { "''".to_string() };
        let lead = if i == 0 { "plot " } else { "     " };
        let tail = if i + 1 < t.bounds.len() { ", \\" } else { "" };
        let _ = writeln!(s, "{lead}{src} using 1:{} skip 1 with lines title '{}'{tail}", i + 2, b.name());
    }
    Ok(s)
}

/// Start of the high-rate region where `E'` beats sphere-packing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    /// First grid rate of the final run of rows with `achieved > sp`.
    pub rate: f64,
    pub row: usize,
}

/// Finds the crossover over rows strictly below capacity. `None` if the
/// table lacks either column or `achieved` does not win at the top rate.
pub fn crossover(t: &CurveTable) -> Option<Crossover> {
    let sp = t.column(BoundKind::SpherePacking)?;
    let ach = t.column(BoundKind::Achieved)?;
    let wins = |row: &CurveRow| match (row.cells[ach].plottable(), row.cells[sp].plottable()) {
        (Some(a), Some(s)) => a > s,
        _ => false,
    };
    let below: Vec<(usize, &CurveRow)> = t.rows.iter().enumerate().filter(|(_, r)| r.rate < t.capacity).collect();
    let mut start = None;
    for &(i, row) in below.iter().rev() {
        if wins(row) {
            start = Some(i);
        } else {
            break;
        }
    }
    start.map(|row| Crossover { rate: t.rows[row].rate, row })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc4() -> Channel {
        Channel::bsc(0.4).unwrap()
    }

    #[test]
    fn bound_names_round_trip() {
        for b in [
            BoundKind::SpherePacking,
            BoundKind::RandomCoding,
            BoundKind::List(4),
            BoundKind::Focusing,
            BoundKind::Achieved,
        ] {
            assert_eq!(b.name().parse::<BoundKind>().unwrap(), b);
        }
        assert_eq!("list:8".parse::<BoundKind>().unwrap(), BoundKind::List(8));
        assert!("list:0".parse::<BoundKind>().is_err());
        assert!("bogus".parse::<BoundKind>().is_err());
    }

    #[test]
    fn two_point_sweep() {
        let ch = bsc4();
        let c = capacity(&ch).value;
        let t = sweep(&ch, "bsc 0.4", 0.3 * c, 0.9 * c, 2, &[BoundKind::SpherePacking]).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[1].rate, 0.9 * c);
    }

    #[test]
    fn invalid_sweeps() {
        let ch = bsc4();
        let c = capacity(&ch).value;
        assert!(matches!(sweep(&ch, "", 0.1 * c, 1.1 * c, 4, &[]), Err(Error::InvalidSweep(_))));
        assert!(matches!(sweep(&ch, "", 0.1 * c, 0.5 * c, 1, &[]), Err(Error::InvalidSweep(_))));
        assert!(matches!(sweep(&ch, "", 0.0, 0.5 * c, 3, &[]), Err(Error::InvalidSweep(_))));
    }

    #[test]
    fn csv_shape_and_units() {
        let ch = bsc4();
        let c = capacity(&ch).value;
        let mut t = sweep(&ch, "bsc", 0.5 * c, 0.6 * c, 2, &[BoundKind::SpherePacking, BoundKind::Focusing]).unwrap();
        t.rows.truncate(1);
        let nats = emit_csv(&t).unwrap();
        assert_eq!(nats.lines().count(), 2);
        assert_eq!(nats.lines().next().unwrap(), "rate,sp,focusing");
        t.unit = Unit::Bits;
        let bits = emit_csv(&t).unwrap();
        let parse =
            |s: &str| -> Vec<f64> { s.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect() };
        for (n, b) in parse(&nats).iter().zip(parse(&bits)) {
            assert!((n / std::f64::consts::LN_2 - b).abs() < 2e-9);
        }
    }

    #[test]
    fn error_cells_are_empty_and_capacity_is_zero() {
        let ch = bsc4();
        let c = capacity(&ch).value;
        let t = sweep(&ch, "bsc", 0.5 * c, c, 2, &[BoundKind::Focusing]).unwrap();
        let csv = emit_csv(&t).unwrap();
        let last = csv.lines().last().unwrap();
        assert!(last.ends_with(",0.000000000"), "{last}");

        let mut broken = t.clone();
        broken.rows[0].cells[0].error = Some(Error::NotSymmetric);
        let csv = emit_csv(&broken).unwrap();
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn empty_table_is_rejected() {
        let t = CurveTable { channel: String::new(), unit: Unit::Nats, capacity: 1.0, bounds: vec![], rows: vec![] };
        assert_eq!(emit_csv(&t), Err(Error::EmptyTable));
        assert_eq!(emit_plot_script(&t, "x.csv"), Err(Error::EmptyTable));
    }

    #[test]
    fn plot_script_references_each_column() {
        let ch = bsc4();
        let c = capacity(&ch).value;
        let bounds = [BoundKind::SpherePacking, BoundKind::Focusing, BoundKind::Achieved];
        let t = sweep(&ch, "bsc", 0.2 * c, 0.8 * c, 3, &bounds).unwrap();
        let s = emit_plot_script(&t, "figure.csv").unwrap();
        for col in ["using 1:2", "using 1:3", "using 1:4"] {
            assert!(s.contains(col), "{s}");
        }
        assert!(!s.contains("using 1:5"));
        assert_eq!(s, emit_plot_script(&t, "figure.csv").unwrap());
    }
}
