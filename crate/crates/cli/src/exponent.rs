use clap::{Args, ValueEnum};
use delayrel::{
    achieved_exponent, achieved_exponent_at_rate, capacity, e0_max, focusing_bound, list_random_coding,
    overhead_fraction, random_coding, sphere_packing, ExponentValue, Flag, Unit,
};

use crate::failure::{flag_code, Failure};
use crate::{fmt9, ChannelArgs, UnitArg};

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Bound {
    /// Sphere-packing exponent.
    Sp,
    /// Random-coding exponent.
    Er,
    /// Random-coding exponent for list decoding (needs --list).
    List,
    /// Focusing bound on the fixed-delay exponent with feedback.
    Focusing,
    /// Exponent of the list-decoding feedback scheme; at a rate, or at --rho.
    Achieved,
    /// Gallager's E0 maximized over inputs (needs --rho).
    E0,
    Capacity,
    /// Flow-control share of each chunk (needs --rho).
    Psi,
}

#[derive(Args)]
pub struct ExponentArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum)]
    bound: Bound,
    /// Rate in bits per channel use.
    #[arg(long, conflicts_with = "rate")]
    rate_bits: Option<f64>,
    /// Rate in nats per channel use.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// List size for --bound list.
    #[arg(long)]
    list: Option<usize>,
    #[arg(long, value_enum, default_value_t = UnitArg::Nats)]
    unit: UnitArg,
}

struct Printer {
    unit: Unit,
}

impl Printer {
    /// A rate or exponent, converted to the output unit.
    fn quantity(&self, name: &str, nats: f64) {
        println!("{name}: {} {}", fmt9(nats * self.unit.per_nat()), self.unit.as_str());
    }

    fn plain(&self, name: &str, v: f64) {
        println!("{name}: {}", fmt9(v));
    }

    fn dist(&self, q: &[f64]) {
        let parts: Vec<String> = q.iter().map(|&x| fmt9(x)).collect();
        println!("input distribution: {}", parts.join(" "));
    }

    fn flags(&self, flags: &[Flag]) {
        if !flags.is_empty() {
            let names: Vec<&str> = flags.iter().map(|f| f.as_str()).collect();
            println!("flags: {}", names.join(","));
        }
    }
}

fn need<T>(v: Option<T>, what: &str, bound: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::input(format!("--bound {bound} needs {what}")))
}

fn rate_nats(a: &ExponentArgs, bound: &str) -> Result<f64, Failure> {
    match (a.rate_bits, a.rate) {
        (Some(b), _) => Ok(b * std::f64::consts::LN_2),
        (None, Some(r)) => Ok(r),
        (None, None) => Err(Failure::input(format!("--bound {bound} needs --rate-bits or --rate"))),
    }
}

fn show_value(p: &Printer, name: &str, v: &ExponentValue, param: &str) -> i32 {
    p.quantity(name, v.value);
    if let Some(x) = v.param {
        p.plain(param, x);
    }
    p.flags(&v.flags);
    flag_code(&v.flags).unwrap_or(0)
}

pub fn run(a: &ExponentArgs) -> Result<i32, Failure> {
    let (ch, _) = a.channel.build()?;
    let p = Printer { unit: a.unit.into() };
    let code = match a.bound {
        Bound::Sp | Bound::Er | Bound::List | Bound::Focusing => {
            let (name, param) = match a.bound {
                Bound::Sp => ("sp", "rho"),
                Bound::Er => ("er", "rho"),
                Bound::List => ("list", "rho"),
                _ => ("focusing", "eta"),
            };
            let r = rate_nats(a, name)?;
            let v = match a.bound {
                Bound::Sp => sphere_packing(&ch, r)?,
                Bound::Er => random_coding(&ch, r)?,
                Bound::List => list_random_coding(&ch, r, need(a.list, "--list", name)?)?,
                _ => focusing_bound(&ch, r)?,
            };
            p.quantity("rate", r);
            show_value(&p, name, &v, param)
        }
        Bound::Achieved => match a.rho {
            Some(rho) => {
                let pt = achieved_exponent(&ch, rho)?;
                p.plain("rho", rho);
                p.quantity("rate", pt.rate);
                p.quantity("exponent", pt.exponent);
                p.plain("psi", pt.psi);
                0
            }
            None => {
                let r = rate_nats(a, "achieved")?;
                let v = achieved_exponent_at_rate(&ch, r)?;
                p.quantity("rate", r);
                show_value(&p, "achieved", &v, "rho")
            }
        },
        Bound::E0 => {
            let rho = need(a.rho, "--rho", "e0")?;
            check_rho(rho)?;
            let v = e0_max(&ch, rho);
            p.plain("rho", rho);
            p.quantity("e0", v.value);
            if let Some(q) = &v.q {
                p.dist(q.as_slice());
            }
            p.flags(&v.flags);
            flag_code(&v.flags).unwrap_or(0)
        }
        Bound::Capacity => {
            let c = capacity(&ch);
            p.quantity("capacity", c.value);
            p.dist(c.q.as_slice());
            if c.converged {
                0
            } else {
                p.flags(&[Flag::NoConvergence]);
                crate::failure::NUMERICAL
            }
        }
        Bound::Psi => {
            let rho = need(a.rho, "--rho", "psi")?;
            p.plain("rho", rho);
            p.plain("psi", overhead_fraction(&ch, rho)?);
            0
        }
    };
    Ok(code)
}

fn check_rho(rho: f64) -> Result<(), Failure> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Failure::input(format!("--rho must be finite and nonnegative, got {rho}")))
    }
}
