//! Discrete memoryless channels and the information measures every bound
//! is built from.
//!
//! All quantities are in nats.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scalar::{xlogx_over_y, Real};

/// Row-stochastic transition matrix `p[x][y]` of a DMC.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T> {
    inputs: usize,
    outputs: usize,
    // row-major, inputs * outputs
    p: Vec<T>,
}

impl<T: Real> Channel<T> {
    /// Validates a transition matrix.
    ///
    /// Rows whose sum is off by less than 1e-9 are renormalized; anything
    /// further off is rejected as [`Error::NonStochastic`].
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let inputs = rows.len();
        if inputs == 0 {
            return Err(Error::EmptyMatrix);
        }
        let outputs = rows[0].len();
        if outputs == 0 {
            return Err(Error::EmptyMatrix);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != outputs {
                return Err(Error::RaggedMatrix { row, expected: outputs, found: r.len() });
            }
        }
        if inputs < 2 || outputs < 2 {
            return Err(Error::TooFewLetters { inputs, outputs });
        }

        let slack = T::tol(1e-9).max(T::epsilon() * T::lit(outputs as f64));
        let mut p = Vec::with_capacity(inputs * outputs);
        for (row, r) in rows.into_iter().enumerate() {
            for (col, &v) in r.iter().enumerate() {
                if !(v >= T::zero()) || !v.is_finite() {
                    return Err(Error::NegativeEntry { row, col, value: v.to_f64_lossy() });
                }
            }
            let sum: T = r.iter().copied().sum();
            if (sum - T::one()).abs() >= slack {
                return Err(Error::NonStochastic { row, sum: sum.to_f64_lossy() });
            }
            p.extend(r.into_iter().map(|v| (v / sum).min(T::one())));
        }
        Ok(Self { inputs, outputs, p })
    }

    /// Binary symmetric channel with crossover probability `delta` in `[0, 1/2]`.
    pub fn bsc(delta: T) -> Result<Self> {
        if !(delta >= T::zero() && delta <= T::lit(0.5)) {
            return Err(Error::OutOfRange {
                what: "crossover probability",
                value: delta.to_f64_lossy(),
                range: "[0, 0.5]",
            });
        }
        let keep = T::one() - delta;
        Self::new(vec![vec![keep, delta], vec![delta, keep]])
    }

    /// Binary erasure channel; output 2 is the erasure symbol.
    pub fn bec(delta: T) -> Result<Self> {
        if !(delta >= T::zero() && delta <= T::one()) {
            return Err(Error::OutOfRange {
                what: "erasure probability",
                value: delta.to_f64_lossy(),
                range: "[0, 1]",
            });
        }
        let keep = T::one() - delta;
        Self::new(vec![vec![keep, T::zero(), delta], vec![T::zero(), keep, delta]])
    }

    /// Noiseless `k`-ary channel.
    pub fn noiseless(k: usize) -> Result<Self> {
        let rows = (0..k).map(|x| (0..k).map(|y| if x == y { T::one() } else { T::zero() }).collect()).collect();
        Self::new(rows)
    }

    /// Parses `{"matrix": [[...], ...]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct ChannelFile {
            matrix: Vec<Vec<f64>>,
        }
        let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(file.matrix.into_iter().map(|r| r.into_iter().map(T::lit).collect()).collect())
    }

    #[inline]
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    #[inline]
    pub fn outputs(&self) -> usize {
        self.outputs
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> T {
        self.p[x * self.outputs + y]
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[T] {
        &self.p[x * self.outputs..(x + 1) * self.outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.p.chunks_exact(self.outputs)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.rows().map(<[T]>::to_vec).collect()
    }

    /// Gallager symmetry: the outputs split into groups such that, within each
    /// group, the rows of the sub-matrix are permutations of each other and so
    /// are the columns.
    ///
    /// Grouping columns by their sorted contents gives the coarsest candidate
    /// partition; if any valid partition exists, this one is valid too.
    pub fn is_symmetric(&self) -> bool {
        let tol = T::tol(1e-12);
        let same = |a: &[T], b: &[T]| a.iter().zip(b).all(|(&u, &v)| (u - v).abs() <= tol);
        let sorted = |mut v: Vec<T>| {
            v.sort_by(|a, b| a.partial_cmp(b).expect("finite entries"));
            v
        };

        let columns: Vec<Vec<T>> =
            (0..self.outputs).map(|y| sorted((0..self.inputs).map(|x| self.prob(x, y)).collect())).collect();

        let mut groups: Vec<Vec<usize>> = Vec::new();
        for y in 0..self.outputs {
            match groups.iter_mut().find(|g| same(&columns[g[0]], &columns[y])) {
                Some(g) => g.push(y),
                None => groups.push(vec![y]),
            }
        }

        groups.iter().all(|group| {
            let sub_row = |x: usize| sorted(group.iter().map(|&y| self.prob(x, y)).collect());
            let first = sub_row(0);
            (1..self.inputs).all(|x| same(&first, &sub_row(x)))
        })
    }
}

/// Probability vector over channel inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDist<T>(Vec<T>);

impl<T: Real> InputDist<T> {
    pub fn new(q: Vec<T>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some((col, &value)) = q.iter().enumerate().find(|(_, &v)| !(v >= T::zero())) {
            return Err(Error::NegativeEntry { row: 0, col, value: value.to_f64_lossy() });
        }
        let sum: T = q.iter().copied().sum();
        if (sum - T::one()).abs() > T::tol(1e-12).max(T::epsilon() * T::lit(q.len() as f64)) {
            return Err(Error::NotNormalized { sum: sum.to_f64_lossy() });
        }
        Ok(Self(q))
    }

    pub fn uniform(k: usize) -> Self {
        let w = T::one() / T::lit(k as f64);
        Self(vec![w; k])
    }

    /// Skips validation; callers guarantee a point of the simplex.
    pub(crate) fn from_simplex_point(q: Vec<T>) -> Self {
        Self(q)
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }
}

fn check_input_len<T: Real>(r: &InputDist<T>, ch: &Channel<T>) -> Result<()> {
    if r.len() != ch.inputs() {
        return Err(Error::DimensionMismatch { expected: ch.inputs(), found: r.len() });
    }
    Ok(())
}

fn output_dist<T: Real>(r: &[T], g: &Channel<T>) -> Vec<T> {
    let mut py = vec![T::zero(); g.outputs()];
    for (x, row) in g.rows().enumerate() {
        for (acc, &v) in py.iter_mut().zip(row) {
            *acc = *acc + r[x] * v;
        }
    }
    py
}

/// `I(r, G) = sum_{x,y} r_x g_xy ln(g_xy / (rG)_y)`.
pub fn mutual_information<T: Real>(r: &InputDist<T>, g: &Channel<T>) -> Result<T> {
    check_input_len(r, g)?;
    Ok(mutual_information_raw(r.as_slice(), g))
}

pub(crate) fn mutual_information_raw<T: Real>(r: &[T], g: &Channel<T>) -> T {
    let py = output_dist(r, g);
    g.rows()
        .zip(r)
        .filter(|(_, &rx)| rx > T::zero())
        .map(|(row, &rx)| rx * row.iter().zip(&py).map(|(&v, &w)| xlogx_over_y(v, w)).sum::<T>())
        .sum()
}

/// `D(G || P | r) = sum_x r_x sum_y g_xy ln(g_xy / p_xy)`.
///
/// Mass of `G` where `P` is zero (on an input `r` uses) gives `+inf`.
pub fn conditional_divergence<T: Real>(g: &Channel<T>, p: &Channel<T>, r: &InputDist<T>) -> Result<T> {
    if g.inputs() != p.inputs() {
        return Err(Error::DimensionMismatch { expected: p.inputs(), found: g.inputs() });
    }
    if g.outputs() != p.outputs() {
        return Err(Error::DimensionMismatch { expected: p.outputs(), found: g.outputs() });
    }
    check_input_len(r, p)?;
    Ok(g.rows()
        .zip(p.rows())
        .zip(r.as_slice())
        .filter(|(_, &rx)| rx > T::zero())
        .map(|((gr, pr), &rx)| rx * row_divergence(gr, pr))
        .sum())
}

/// `D(a || b)` for two rows.
pub(crate) fn row_divergence<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&u, &v)| xlogx_over_y(u, v)).sum()
}

/// Result of the capacity computation.
#[derive(Debug, Clone, PartialEq)]
pub struct Capacity<T> {
    /// Mutual information at `q`; a lower bound on capacity within `gap`.
    pub value: T,
    pub q: InputDist<T>,
    /// Upper minus lower Blahut-Arimoto bound at termination.
    pub gap: T,
    pub iterations: usize,
    /// `false` when the iteration cap was hit first.
    pub converged: bool,
}

pub const CAPACITY_MAX_ITERATIONS: usize = 10_000;

/// Channel capacity by Blahut-Arimoto alternating maximization from the
/// uniform input distribution.
///
/// Stops when successive lower bounds differ by less than 1e-12 (relative)
/// or the upper/lower bound gap closes to that level.
pub fn capacity<T: Real>(ch: &Channel<T>) -> Capacity<T> {
    let k = ch.inputs();
    let rel = T::tol(1e-12);
    let mut q = vec![T::one() / T::lit(k as f64); k];
    let mut prev = T::neg_infinity();
    let mut exp_div = vec![T::zero(); k];

    for it in 1..=CAPACITY_MAX_ITERATIONS {
        let py = output_dist(&q, ch);
        for (x, row) in ch.rows().enumerate() {
            // q_x > 0 keeps every output this row reaches positive under py.
            exp_div[x] = row_divergence(row, &py).exp();
        }
        let z: T = q.iter().zip(&exp_div).map(|(&a, &b)| a * b).sum();
        let lower = z.ln();
        let upper = exp_div.iter().fold(T::zero(), |m, &v| m.max(v)).ln();
        let gap = (upper - lower).max(T::zero());
        let scale = lower.abs().max(T::min_positive_value());

        if gap <= rel * scale || gap <= T::tol(1e-15) || (lower - prev).abs() <= rel * scale {
            let value = mutual_information_raw(&q, ch);
            return Capacity { value, q: InputDist::from_simplex_point(q), gap, iterations: it, converged: true };
        }
        prev = lower;
        for (qx, &e) in q.iter_mut().zip(&exp_div) {
            *qx = *qx * e / z;
        }
    }

    let value = mutual_information_raw(&q, ch);
    let py = output_dist(&q, ch);
    let upper = ch.rows().map(|row| row_divergence(row, &py)).fold(T::zero(), T::max);
    Capacity {
        value,
        q: InputDist::from_simplex_point(q),
        gap: (upper - value).max(T::zero()),
        iterations: CAPACITY_MAX_ITERATIONS,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn hb(p: f64) -> f64 {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }

    #[test]
    fn make_dmc_examples() {
        let id = Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(id, Channel::<f64>::noiseless(2).unwrap());
        let bsc = Channel::new(vec![vec![0.6, 0.4], vec![0.4, 0.6]]).unwrap();
        assert_eq!(bsc, Channel::bsc(0.4).unwrap());
        assert!(matches!(
            Channel::new(vec![vec![0.6, 0.4, 0.1], vec![0.6, 0.4, 0.0]]),
            Err(Error::NonStochastic { row: 0, .. })
        ));
    }

    #[test]
    fn make_dmc_rejects_bad_shapes() {
        assert_eq!(Channel::<f64>::new(vec![]), Err(Error::EmptyMatrix));
        assert!(matches!(Channel::new(vec![vec![1.0], vec![1.0]]), Err(Error::TooFewLetters { .. })));
        assert!(matches!(Channel::new(vec![vec![0.5, 0.5]]), Err(Error::TooFewLetters { .. })));
        assert!(matches!(Channel::new(vec![vec![0.5, 0.5], vec![1.0]]), Err(Error::RaggedMatrix { row: 1, .. })));
        assert!(matches!(
            Channel::new(vec![vec![1.2, -0.2], vec![0.5, 0.5]]),
            Err(Error::NegativeEntry { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn tiny_row_error_is_renormalized() {
        let ch = Channel::new(vec![vec![0.6 + 5e-10, 0.4], vec![0.4, 0.6]]).unwrap();
        let s: f64 = ch.row(0).iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
        assert!(Channel::new(vec![vec![0.6 + 2e-9, 0.4], vec![0.4, 0.6]]).is_err());
    }

    #[test]
    fn bsc_and_bec_constructors() {
        assert_eq!(Channel::<f64>::bsc(0.0).unwrap(), Channel::noiseless(2).unwrap());
        assert!(matches!(Channel::bsc(0.6), Err(Error::OutOfRange { .. })));
        let bec = Channel::bec(0.4).unwrap();
        assert_eq!(bec.to_rows(), vec![vec![0.6, 0.0, 0.4], vec![0.0, 0.6, 0.4]]);
        let dead = Channel::<f64>::bec(0.0).unwrap();
        assert_eq!(dead.prob(0, 2), 0.0);
        let all = Channel::<f64>::bec(1.0).unwrap();
        assert_abs_diff_eq!(capacity(&all).value, 0.0, epsilon = 1e-15);
        assert!(Channel::bec(1.5).is_err());
    }

    #[test]
    fn capacity_closed_forms() {
        let c = capacity(&Channel::bsc(0.5).unwrap());
        assert_abs_diff_eq!(c.value, 0.0, epsilon = 1e-15);

        let c = capacity(&Channel::bsc(0.4).unwrap());
        assert_abs_diff_eq!(c.value, std::f64::consts::LN_2 - hb(0.4), epsilon = 1e-12);
        assert_abs_diff_eq!(c.value, 0.0201355, epsilon = 5e-8);
        assert!(c.converged);

        let c = capacity(&Channel::bec(0.4).unwrap());
        assert_abs_diff_eq!(c.value, 0.6 * std::f64::consts::LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(c.value, 0.415888, epsilon = 5e-7);
    }

    #[test]
    fn z_channel_capacity_matches_closed_form() {
        // Z-channel with 1 -> 0 flip probability e: C = ln(1 + (1-e) e^{e/(1-e)})
        let e: f64 = 0.3;
        let z = Channel::new(vec![vec![1.0, 0.0], vec![e, 1.0 - e]]).unwrap();
        let c = capacity(&z);
        let closed = (1.0 + (1.0 - e) * e.powf(e / (1.0 - e))).ln();
        assert!(c.converged);
        assert_abs_diff_eq!(c.value, closed, epsilon = 1e-10);
    }

    #[test]
    fn mutual_information_examples() {
        let u = InputDist::uniform(2);
        let id = Channel::<f64>::noiseless(2).unwrap();
        assert_abs_diff_eq!(mutual_information(&u, &id).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        let useless = Channel::bsc(0.5).unwrap();
        assert_abs_diff_eq!(mutual_information(&u, &useless).unwrap(), 0.0, epsilon = 1e-15);
        let bsc = Channel::bsc(0.4).unwrap();
        assert_abs_diff_eq!(mutual_information(&u, &bsc).unwrap(), std::f64::consts::LN_2 - hb(0.4), epsilon = 1e-14);
        let u3 = InputDist::uniform(3);
        assert!(matches!(mutual_information(&u3, &bsc), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn conditional_divergence_examples() {
        let u = InputDist::uniform(2);
        let p = Channel::bsc(0.4).unwrap();
        assert_eq!(conditional_divergence(&p, &p, &u).unwrap(), 0.0);

        let g = Channel::bsc(0.5).unwrap();
        let d = conditional_divergence(&g, &p, &u).unwrap();
        assert_abs_diff_eq!(d, -(4.0f64 * 0.4 * 0.6).ln() / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d, 0.020411, epsilon = 5e-7);

        let z = Channel::new(vec![vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap();
        assert_eq!(conditional_divergence(&g, &z, &u).unwrap(), f64::INFINITY);
        // input 0 unused: the offending row does not count
        let r = InputDist::new(vec![0.0, 1.0]).unwrap();
        assert!(conditional_divergence(&g, &z, &r).unwrap().is_finite());
    }

    #[test]
    fn symmetry_partition_test() {
        assert!(Channel::<f64>::bsc(0.4).unwrap().is_symmetric());
        assert!(Channel::<f64>::bec(0.4).unwrap().is_symmetric());
        // Columns {0, 2} share the sorted contents {0.1, 0.7}; column 1 is
        // constant. Both sub-matrices have permuted rows, so it is symmetric.
        let ch = Channel::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.2, 0.7]]).unwrap();
        assert!(ch.is_symmetric());
        let z = Channel::new(vec![vec![1.0, 0.0], vec![0.3, 0.7]]).unwrap();
        assert!(!z.is_symmetric());
        let skew = Channel::new(vec![vec![0.7, 0.2, 0.1], vec![0.2, 0.1, 0.7]]).unwrap();
        assert!(!skew.is_symmetric());
    }

    #[test]
    fn json_channel_file() {
        let ch = Channel::<f64>::from_json_str(r#"{"matrix": [[0.6, 0.4], [0.4, 0.6]]}"#).unwrap();
        assert_eq!(ch, Channel::bsc(0.4).unwrap());
        assert!(matches!(Channel::<f64>::from_json_str("{}"), Err(Error::Parse(_))));
    }

    #[test]
    fn f32_channel_works() {
        let c = capacity(&Channel::<f32>::bec(0.4).unwrap());
        assert!((c.value - 0.415888).abs() < 1e-5);
        assert!(Channel::<f32>::new(vec![vec![0.6, 0.4], vec![0.4, 0.6]]).is_ok());
    }
}
