//! Repeat-until-received transmission over a BEC with feedback: the
//! birth-death chain behind it, a Monte-Carlo simulator with per-delay error
//! accounting, and exponent fitting.
//!
//! Timing convention: channel uses are numbered from 1. Bit `i` (from 1)
//! arrives at use `2i` and may be sent in that same use. With delay `d` it is
//! correct if it has been received by the end of use `2i + d`. A bit still
//! missing at its deadline is replaced by a fair coin, so it counts as half
//! an error.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};

/// The BEC feedback queue observed every two channel uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueChain {
    /// `delta^2`: both uses erased, one more bit waiting.
    pub birth_prob: f64,
    /// `(1 - delta)^2`: both uses delivered.
    pub death_prob: f64,
    pub delta: f64,
}

impl QueueChain {
    /// Ratio of successive stationary level probabilities, `delta^2 / (1-delta)^2`.
    pub fn geometric_ratio(&self) -> f64 {
        self.birth_prob / self.death_prob
    }
}

pub fn birth_death(delta: f64) -> Result<QueueChain> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::OutOfRange { what: "erasure probability", value: delta, range: "(0, 0.5)" });
    }
    Ok(QueueChain { birth_prob: delta * delta, death_prob: (1.0 - delta) * (1.0 - delta), delta })
}

/// Per-channel-use delay exponent of the chain: the stationary tail ratio
/// per two uses, halved.
pub fn tail_exponent(chain: &QueueChain) -> f64 {
    -chain.geometric_ratio().ln() / 2.0
}

/// Error statistics at one delay.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayErrorRow {
    /// Channel uses between a bit's arrival and its deadline.
    pub delay: u64,
    /// Estimated bit-error probability.
    pub error: f64,
    pub trials: u64,
    /// 95% normal-approximation half-width of `error`.
    pub half_width: f64,
    /// Bits emitted wrong at the deadline.
    pub wrong: u64,
    /// Bits missing at the deadline (each counts 1/2).
    pub missed: u64,
}

impl DelayErrorRow {
    pub fn from_counts(delay: u64, trials: u64, wrong: u64, missed: u64) -> Self {
        let (error, half_width) = if trials == 0 {
            (0.0, 0.0)
        } else {
            let n = trials as f64;
            let mean = (wrong as f64 + 0.5 * missed as f64) / n;
            let second = (wrong as f64 + 0.25 * missed as f64) / n;
            let var = (second - mean * mean).max(0.0);
            (mean, 1.96 * (var / n).sqrt())
        };
        Self { delay, error, trials, half_width, wrong, missed }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DelayErrorTable {
    /// Strictly increasing in delay.
    pub rows: Vec<DelayErrorRow>,
}

impl DelayErrorTable {
    /// `delay,error,trials,half_width` with the estimates in scientific notation.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("delay,error,trials,half_width\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:.9e},{},{:.9e}\n", r.delay, r.error, r.trials, r.half_width));
        }
        s
    }

    /// Adds the counts of `other`, which must cover the same delays.
    pub fn merge(&self, other: &DelayErrorTable) -> Result<DelayErrorTable> {
        let same =
            self.rows.len() == other.rows.len() && self.rows.iter().zip(&other.rows).all(|(a, b)| a.delay == b.delay);
        if !same {
            return Err(Error::InvalidConfig("merging tables with different delays".into()));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                DelayErrorRow::from_counts(a.delay, a.trials + b.trials, a.wrong + b.wrong, a.missed + b.missed)
            })
            .collect();
        Ok(DelayErrorTable { rows })
    }
}

/// Sorted, deduplicated delays; rejects an empty list or a horizon shorter
/// than ten times the largest delay.
pub(crate) fn check_delays(delays: &[u64], horizon: u64) -> Result<Vec<u64>> {
    let mut d = delays.to_vec();
    d.sort_unstable();
    d.dedup();
    let max = *d.last().ok_or_else(|| Error::InvalidConfig("no delays given".into()))?;
    let required = (10 * max).max(1);
    if horizon < required {
        return Err(Error::HorizonTooShort { horizon, required });
    }
    Ok(d)
}

/// Outcome of [`simulate_bec_feedback_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct BecQueueRun {
    pub table: DelayErrorTable,
    /// `levels[k]`: number of arrivals, after burn-in, that left `k` bits in
    /// the queue (the arriving bit included).
    pub levels: Vec<u64>,
}

impl BecQueueRun {
    /// `levels[k+1] / levels[k]` for `k = 1..=count`, `None` where `levels[k]` is 0.
    pub fn level_ratios(&self, count: usize) -> Vec<Option<f64>> {
        (1..=count)
            .map(|k| {
                let a = self.levels.get(k).copied().unwrap_or(0);
                let b = self.levels.get(k + 1).copied().unwrap_or(0);
                (a > 0).then(|| b as f64 / a as f64)
            })
            .collect()
    }
}

/// Simulates `horizon` channel uses of the repeat scheme and tabulates the
/// bit-error probability at each delay. Bits arriving within `max(delays)`
/// uses of either end of the run are not counted.
pub fn simulate_bec_feedback(delta: f64, horizon: u64, delays: &[u64], seed: u64) -> Result<DelayErrorTable> {
    simulate_bec_feedback_detailed(delta, horizon, delays, seed).map(|r| r.table)
}

pub fn simulate_bec_feedback_detailed(delta: f64, horizon: u64, delays: &[u64], seed: u64) -> Result<BecQueueRun> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::OutOfRange { what: "erasure probability", value: delta, range: "[0, 1)" });
    }
    let delays = check_delays(delays, horizon)?;
    let max_delay = *delays.last().unwrap();
    let mut rng = stream(seed, 0);

    let bits = horizon / 2;
    let mut delivered = vec![u64::MAX; bits as usize + 1];
    let mut queue: VecDeque<u64> = VecDeque::new();
    let mut levels: Vec<u64> = Vec::new();
    let counted = |arrival: u64| arrival >= max_delay && arrival < horizon - max_delay;

    for t in 1..=horizon {
        if t % 2 == 0 {
            let i = t / 2;
            queue.push_back(i);
            if counted(t) {
                let l = queue.len();
                if levels.len() <= l {
                    levels.resize(l + 1, 0);
                }
                levels[l] += 1;
            }
        }
        if let Some(&head) = queue.front() {
            if rng.gen::<f64>() >= delta {
                delivered[head as usize] = t;
                queue.pop_front();
            }
        }
    }

    let rows = delays
        .iter()
        .map(|&d| {
            let (mut trials, mut missed) = (0u64, 0u64);
            for i in 1..=bits {
                if counted(2 * i) {
                    trials += 1;
                    if delivered[i as usize] > 2 * i + d {
                        missed += 1;
                    }
                }
            }
            DelayErrorRow::from_counts(d, trials, 0, missed)
        })
        .collect();
    Ok(BecQueueRun { table: DelayErrorTable { rows }, levels })
}

/// Runs `replicas` independent simulations with seeds derived from `seed`
/// and pools their counts.
pub fn simulate_bec_feedback_replicas(
    delta: f64,
    horizon: u64,
    delays: &[u64],
    seed: u64,
    replicas: u64,
) -> Result<DelayErrorTable> {
    if replicas == 0 {
        return Err(Error::InvalidConfig("replicas must be positive".into()));
    }
    let tables: Result<Vec<DelayErrorTable>> = (0..replicas)
        .into_par_iter()
        .map(|r| simulate_bec_feedback(delta, horizon, delays, derive_seed(seed, r)))
        .collect();
    let tables = tables?;
    let mut acc = tables[0].clone();
    for t in &tables[1..] {
        acc = acc.merge(t)?;
    }
    Ok(acc)
}

/// Least-squares line through `(delay, -ln error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    /// Nats per channel use.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Delays used in the fit.
    pub used: Vec<u64>,
    /// Delays dropped because no errors were observed.
    pub excluded: Vec<u64>,
}

pub fn fit_exponent(t: &DelayErrorTable) -> Result<ExponentFit> {
    let (used, excluded): (Vec<&DelayErrorRow>, Vec<&DelayErrorRow>) = t.rows.iter().partition(|r| r.error > 0.0);
    if used.is_empty() && !t.rows.is_empty() {
        return Err(Error::AllZeroErrors);
    }
    if used.len() < 3 {
        return Err(Error::TooFewPoints { found: used.len() });
    }
    let xs: Vec<f64> = used.iter().map(|r| r.delay as f64).collect();
    let ys: Vec<f64> = used.iter().map(|r| -r.error.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewPoints { found: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        used: used.iter().map(|r| r.delay).collect(),
        excluded: excluded.iter().map(|r| r.delay).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_probabilities() {
        let c = birth_death(0.4).unwrap();
        assert!((c.birth_prob - 0.16).abs() < 1e-15);
        assert!((c.death_prob - 0.36).abs() < 1e-15);
        let c = birth_death(1e-12).unwrap();
        assert!(c.birth_prob < 1e-20 && (c.death_prob - 1.0).abs() < 1e-11);
        assert!(birth_death(0.5).is_err());
    }

    #[test]
    fn tail_exponent_values() {
        let c = birth_death(0.4).unwrap();
        assert!((tail_exponent(&c) - 1.5f64.ln()).abs() < 1e-14);
        assert!((tail_exponent(&birth_death(0.25).unwrap()) - 3f64.ln()).abs() < 1e-14);
        assert_eq!(tail_exponent(&c), crate::exponents::bec_feedback_exponent(0.4).unwrap());
    }

    #[test]
    fn synthetic_fit_is_exact() {
        let rows = [10u64, 20, 30, 40]
            .iter()
            .map(|&d| DelayErrorRow {
                delay: d,
                error: (-0.4 * d as f64).exp(),
                trials: 1,
                half_width: 0.0,
                wrong: 0,
                missed: 0,
            })
            .collect();
        let f = fit_exponent(&DelayErrorTable { rows }).unwrap();
        assert!((f.slope - 0.4).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        let one = DelayErrorTable { rows: vec![DelayErrorRow::from_counts(5, 10, 1, 0)] };
        assert_eq!(fit_exponent(&one), Err(Error::TooFewPoints { found: 1 }));
        let zeros = DelayErrorTable { rows: (1..5).map(|d| DelayErrorRow::from_counts(d, 10, 0, 0)).collect() };
        assert_eq!(fit_exponent(&zeros), Err(Error::AllZeroErrors));
    }

    #[test]
    fn horizon_check() {
        assert!(matches!(simulate_bec_feedback(0.4, 100, &[20], 1), Err(Error::HorizonTooShort { .. })));
    }

    #[test]
    fn zero_delay_error_is_positive() {
        let t = simulate_bec_feedback(0.4, 20_000, &[0], 3).unwrap();
        assert!(t.rows[0].error > 0.0);
    }

    #[test]
    fn low_erasure_errors_are_tiny() {
        let t = simulate_bec_feedback(0.01, 200_000, &[20, 40], 5).unwrap();
        assert!(t.rows.iter().all(|r| r.error < 1e-4), "{t:?}");
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = simulate_bec_feedback(0.4, 50_000, &[2, 4, 8], 11).unwrap();
        let b = simulate_bec_feedback(0.4, 50_000, &[8, 4, 2], 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn replicas_match_sequential_merge() {
        let pooled = simulate_bec_feedback_replicas(0.4, 20_000, &[2, 6], 9, 4).unwrap();
        let mut acc = simulate_bec_feedback(0.4, 20_000, &[2, 6], derive_seed(9, 0)).unwrap();
        for r in 1..4 {
            acc = acc.merge(&simulate_bec_feedback(0.4, 20_000, &[2, 6], derive_seed(9, r)).unwrap()).unwrap();
        }
        assert_eq!(pooled, acc);
    }

    #[test]
    fn csv_header() {
        let t = simulate_bec_feedback(0.4, 1_000, &[1], 1).unwrap();
        assert!(t.to_csv().starts_with("delay,error,trials,half_width\n"));
    }
}
