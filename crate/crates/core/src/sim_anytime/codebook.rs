use crate::error::{Error, Result};
use crate::rng::{hash_words, unit_from_hash};
use crate::Channel;

/// Largest block payload the exhaustive list decoder accepts.
pub const MAX_PAYLOAD_BITS: u32 = 14;

/// Cumulative distribution over a small alphabet, sampled by inversion.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Cdf(Vec<f64>);

impl Cdf {
    pub(crate) fn new(p: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut c: Vec<f64> = p
            .iter()
            .map(|&x| {
                acc += x;
                acc
            })
            .collect();
        if let Some(last) = c.last_mut() {
            *last = f64::INFINITY;
        }
        Cdf(c)
    }

    #[inline]
    pub(crate) fn sample(&self, u: f64) -> usize {
        self.0.iter().position(|&c| u < c).unwrap_or(self.0.len() - 1)
    }
}

/// `ln p(y|x)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LogLik {
    outputs: usize,
    table: Vec<f64>,
}

impl LogLik {
    pub(crate) fn new(ch: &Channel) -> Self {
        let table = ch.rows().flat_map(|r| r.iter().map(|&p| p.ln())).collect();
        Self { outputs: ch.outputs(), table }
    }

    #[inline]
    pub(crate) fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.outputs + y]
    }
}

/// Seeded infinite random codebook: the symbol of candidate payload `m` of
/// block `b` at position `t` is drawn from `q` by hashing `(seed, b, m, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    seed: u64,
    payload_bits: u32,
    cdf: Cdf,
    loglik: LogLik,
}

impl Codebook {
    pub fn new(ch: &Channel, q: &[f64], payload_bits: u32, seed: u64) -> Result<Self> {
        if payload_bits > MAX_PAYLOAD_BITS {
            return Err(Error::PayloadTooLarge { bits: payload_bits, max: MAX_PAYLOAD_BITS });
        }
        if payload_bits == 0 {
            return Err(Error::InvalidConfig("block payload must be at least one bit".into()));
        }
        if q.len() != ch.inputs() {
            return Err(Error::DimensionMismatch { expected: ch.inputs(), found: q.len() });
        }
        Ok(Self { seed, payload_bits, cdf: Cdf::new(q), loglik: LogLik::new(ch) })
    }

    pub fn payload_bits(&self) -> u32 {
        self.payload_bits
    }

    pub fn candidates(&self) -> u32 {
        1 << self.payload_bits
    }

    #[inline]
    pub fn symbol(&self, block: u64, payload: u32, position: u64) -> usize {
        self.cdf.sample(unit_from_hash(hash_words(&[self.seed, block, payload as u64, position])))
    }

    /// Adds the log-likelihood of `output` at `position` to every candidate.
    pub(crate) fn accumulate(&self, scores: &mut [f64], block: u64, position: u64, output: usize) {
        for (m, s) in scores.iter_mut().enumerate() {
            *s += self.loglik.get(self.symbol(block, m as u32, position), output);
        }
    }

    pub(crate) fn scores(&self, block: u64, outputs: &[u8]) -> Vec<f64> {
        let mut s = vec![0.0; self.candidates() as usize];
        for (t, &y) in outputs.iter().enumerate() {
            self.accumulate(&mut s, block, t as u64, y as usize);
        }
        s
    }

    /// Position of `truth` in the ranked list implied by `scores`.
    pub(crate) fn rank_of(scores: &[f64], truth: u32) -> usize {
        let ts = scores[truth as usize];
        scores.iter().enumerate().filter(|&(m, &s)| s > ts || (s == ts && (m as u32) < truth)).count()
    }

    /// The `list_size` most likely payloads given `outputs` at positions
    /// `0..outputs.len()`, best first; ties go to the smaller payload.
    pub fn list_decode(&self, block: u64, outputs: &[u8], list_size: usize) -> Vec<u32> {
        ranked(&self.scores(block, outputs), list_size)
    }
}

pub(crate) fn ranked(scores: &[f64], list_size: usize) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..scores.len() as u32).collect();
    idx.sort_by(|&a, &b| scores[b as usize].total_cmp(&scores[a as usize]).then(a.cmp(&b)));
    idx.truncate(list_size);
    idx
}

/// [`Codebook::list_decode`] with the payload cap checked up front.
pub fn list_decode_block(codebook: &Codebook, block: u64, outputs: &[u8], list_size: usize) -> Result<Vec<u32>> {
    if codebook.payload_bits > MAX_PAYLOAD_BITS {
        return Err(Error::PayloadTooLarge { bits: codebook.payload_bits, max: MAX_PAYLOAD_BITS });
    }
    Ok(codebook.list_decode(block, outputs, list_size))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn transmit(ch: &Channel, cb: &Codebook, block: u64, payload: u32, uses: u64, rng: &mut ChaCha8Rng) -> Vec<u8> {
        (0..uses)
            .map(|t| {
                let x = cb.symbol(block, payload, t);
                Cdf::new(ch.row(x)).sample(rng.gen()) as u8
            })
            .collect()
    }

    #[test]
    fn payload_cap() {
        let ch = Channel::bsc(0.1).unwrap();
        assert!(matches!(Codebook::new(&ch, &[0.5, 0.5], 15, 1), Err(Error::PayloadTooLarge { .. })));
        assert!(Codebook::new(&ch, &[0.5, 0.5], 14, 1).is_ok());
    }

    #[test]
    fn symbols_are_deterministic() {
        let ch = Channel::bsc(0.1).unwrap();
        let a = Codebook::new(&ch, &[0.5, 0.5], 4, 99).unwrap();
        let b = Codebook::new(&ch, &[0.5, 0.5], 4, 99).unwrap();
        for t in 0..50 {
            assert_eq!(a.symbol(3, 7, t), b.symbol(3, 7, t));
        }
    }

    #[test]
    fn noiseless_truth_first() {
        let ch = Channel::noiseless(2).unwrap();
        let cb = Codebook::new(&ch, &[0.5, 0.5], 6, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for payload in [0, 17, 63] {
            let y = transmit(&ch, &cb, 2, payload, 40, &mut rng);
            assert_eq!(cb.list_decode(2, &y, 1), vec![payload]);
        }
    }

    #[test]
    fn full_list_contains_truth() {
        let ch = Channel::bsc(0.3).unwrap();
        let cb = Codebook::new(&ch, &[0.5, 0.5], 5, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = transmit(&ch, &cb, 0, 9, 3, &mut rng);
        let list = list_decode_block(&cb, 0, &y, 32).unwrap();
        assert!(list.contains(&9));
        assert_eq!(list.len(), 32);
    }

    #[test]
    fn rank_matches_sorted_list() {
        let scores = [-1.0, -0.5, -1.0, f64::NEG_INFINITY, -0.5];
        let list = ranked(&scores, 5);
        assert_eq!(list, vec![1, 4, 0, 2, 3]);
        for (pos, &m) in list.iter().enumerate() {
            assert_eq!(Codebook::rank_of(&scores, m), pos);
        }
    }

    fn list_hits(p: f64, uses: u64, trials: u64) -> [u32; 3] {
        let ch = Channel::bsc(p).unwrap();
        let cb = Codebook::new(&ch, &[0.5, 0.5], 8, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hits = [0u32; 3];
        for trial in 0..trials {
            let payload = rng.gen_range(0..256);
            let y = transmit(&ch, &cb, trial, payload, uses, &mut rng);
            let rank = Codebook::rank_of(&cb.scores(trial, &y), payload);
            for (l, h) in hits.iter_mut().enumerate() {
                if rank < 1 << l {
                    *h += 1;
                }
            }
        }
        hits
    }

    #[test]
    fn larger_lists_catch_truth_more_often() {
        // 64 uses of BSC(0.05) almost never miss, so only monotonicity shows.
        let easy = list_hits(0.05, 64, 10_000);
        assert!(easy[0] <= easy[1] && easy[1] <= easy[2], "{easy:?}");
        // A short, noisy block separates the list sizes.
        let hard = list_hits(0.2, 16, 10_000);
        assert!(hard[0] < hard[1] && hard[1] < hard[2], "{hard:?}");
    }
}
