use crate::error::{Error, Result};
use crate::rng::{hash_words, unit_from_hash};
use crate::Channel;

use super::codebook::{Cdf, LogLik};

/// Largest `window * (l + 1)` accepted by the flow decoder.
pub const MAX_WINDOW_BITS: u32 = 24;

/// Punctuation sent once per chunk: whether the current block was confirmed
/// and, if so, its position in the decoder's list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlowMessage {
    Deny,
    Confirm(u32),
}

impl FlowMessage {
    /// `Deny` is 0, `Confirm(i)` is `i + 1`.
    pub fn index(self) -> u32 {
        match self {
            FlowMessage::Deny => 0,
            FlowMessage::Confirm(i) => i + 1,
        }
    }

    pub fn from_index(i: u32) -> Self {
        if i == 0 {
            FlowMessage::Deny
        } else {
            FlowMessage::Confirm(i - 1)
        }
    }

    /// `l + 1` bits: the confirm bit, then the list index most significant
    /// bit first. A deny pads the index with zeros.
    pub fn to_bits(self, l: u32) -> Vec<bool> {
        let (confirm, idx) = match self {
            FlowMessage::Deny => (false, 0),
            FlowMessage::Confirm(i) => (true, i),
        };
        std::iter::once(confirm).chain((0..l).rev().map(|b| (idx >> b) & 1 == 1)).collect()
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        match bits.split_first() {
            Some((true, rest)) => FlowMessage::Confirm(rest.iter().fold(0, |a, &b| (a << 1) | b as u32)),
            _ => FlowMessage::Deny,
        }
    }
}

/// Random tree code for the punctuation stream. The `theta` letters of chunk
/// `j` hash `(seed, j, slot, h_j)` where `h_j` chains every message up to and
/// including chunk `j`, so histories that differ at chunk `k` get independent
/// letters from `k` on.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCode {
    seed: u64,
    theta: u32,
    l: u32,
    cdf: Cdf,
    loglik: LogLik,
}

impl FlowCode {
    pub fn new(ch: &Channel, q: &[f64], theta: u32, l: u32, seed: u64) -> Result<Self> {
        if theta == 0 {
            return Err(Error::InvalidConfig("flow code needs theta >= 1".into()));
        }
        if q.len() != ch.inputs() {
            return Err(Error::DimensionMismatch { expected: ch.inputs(), found: q.len() });
        }
        Ok(Self { seed, theta, l, cdf: Cdf::new(q), loglik: LogLik::new(ch) })
    }

    pub fn theta(&self) -> u32 {
        self.theta
    }

    /// Number of distinct messages per chunk, `2^l + 1`.
    pub fn alphabet(&self) -> u32 {
        (1 << self.l) + 1
    }

    pub(crate) fn root(&self) -> u64 {
        hash_words(&[self.seed, 0xF10])
    }

    #[inline]
    pub(crate) fn chain(&self, prev: u64, chunk: u64, msg: FlowMessage) -> u64 {
        hash_words(&[prev, chunk, msg.index() as u64])
    }

    #[inline]
    pub(crate) fn letter(&self, chunk: u64, slot: u32, prefix: u64) -> usize {
        self.cdf.sample(unit_from_hash(hash_words(&[self.seed, chunk, slot as u64, prefix])))
    }

    pub(crate) fn letters(&self, chunk: u64, prefix: u64) -> Vec<usize> {
        (0..self.theta).map(|s| self.letter(chunk, s, prefix)).collect()
    }

    fn chunk_loglik(&self, chunk: u64, prefix: u64, outputs: &[u8]) -> f64 {
        outputs
            .iter()
            .enumerate()
            .map(|(s, &y)| self.loglik.get(self.letter(chunk, s as u32, prefix), y as usize))
            .sum()
    }
}

/// Letters sent in chunk `chunk` given the message history through that
/// chunk (`history.len() > chunk`).
pub fn flow_encode(code: &FlowCode, history: &[FlowMessage], chunk: u64) -> Vec<usize> {
    let mut h = code.root();
    for (j, &m) in history.iter().enumerate().take(chunk as usize + 1) {
        h = code.chain(h, j as u64, m);
    }
    code.letters(chunk, h)
}

/// Sequential flow decoder: maximum likelihood over the last `window`
/// chunks, everything older frozen at the estimate it had when it left the
/// window.
#[derive(Debug, Clone)]
pub struct FlowDecoder {
    code: FlowCode,
    window: u32,
    frozen: Vec<FlowMessage>,
    frozen_hash: u64,
    outputs: Vec<Vec<u8>>,
    estimate: Vec<FlowMessage>,
}

impl FlowDecoder {
    pub fn new(code: FlowCode, window: u32) -> Result<Self> {
        check_window(window, code.l)?;
        let root = code.root();
        Ok(Self { code, window, frozen: Vec::new(), frozen_hash: root, outputs: Vec::new(), estimate: Vec::new() })
    }

    /// Messages that can no longer change.
    pub fn frozen(&self) -> &[FlowMessage] {
        &self.frozen
    }

    /// Current estimate of every message so far.
    pub fn estimate(&self) -> &[FlowMessage] {
        &self.estimate
    }

    /// Takes the `theta` outputs of the next chunk and re-decodes the window.
    pub fn push(&mut self, chunk_outputs: Vec<u8>) -> &[FlowMessage] {
        let base = self.frozen.len();
        if self.outputs.len() + 1 - base > self.window as usize {
            let m = self.estimate[base];
            self.frozen_hash = self.code.chain(self.frozen_hash, base as u64, m);
            self.frozen.push(m);
        }
        self.outputs.push(chunk_outputs);
        let base = self.frozen.len();
        let span = self.outputs.len() - base;

        // Incumbent: the previous estimate extended by the best single message.
        let mut incumbent: Vec<u32> = self.estimate[base..].iter().map(|m| m.index()).collect();
        let mut h = self.frozen_hash;
        let mut ll = 0.0;
        for (k, &m) in incumbent.iter().enumerate() {
            let chunk = (base + k) as u64;
            h = self.code.chain(h, chunk, FlowMessage::from_index(m));
            ll += self.code.chunk_loglik(chunk, h, &self.outputs[base + k]);
        }
        let last = (base + span - 1) as u64;
        let (best_m, best_ll) = (0..self.code.alphabet())
            .map(|m| {
                let hm = self.code.chain(h, last, FlowMessage::from_index(m));
                (m, self.code.chunk_loglik(last, hm, &self.outputs[base + span - 1]))
            })
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        incumbent.push(best_m);
        ll += best_ll;

        let mut search = Search { best: incumbent, best_ll: ll, path: Vec::with_capacity(span) };
        self.dfs(&mut search, base, span, self.frozen_hash, 0.0);

        self.estimate.truncate(base);
        self.estimate.extend(search.best.iter().map(|&m| FlowMessage::from_index(m)));
        &self.estimate
    }

    fn dfs(&self, s: &mut Search, base: usize, span: usize, prefix: u64, partial: f64) {
        let depth = s.path.len();
        if depth == span {
            if partial > s.best_ll || (partial == s.best_ll && s.path < s.best) {
                s.best_ll = partial;
                s.best.clone_from(&s.path);
            }
            return;
        }
        let chunk = (base + depth) as u64;
        for m in 0..self.code.alphabet() {
            let h = self.code.chain(prefix, chunk, FlowMessage::from_index(m));
            let ll = partial + self.code.chunk_loglik(chunk, h, &self.outputs[base + depth]);
            if ll < s.best_ll {
                continue;
            }
            s.path.push(m);
            self.dfs(s, base, span, h, ll);
            s.path.pop();
        }
    }
}

struct Search {
    best: Vec<u32>,
    best_ll: f64,
    path: Vec<u32>,
}

pub(crate) fn check_window(window: u32, l: u32) -> Result<()> {
    let bits = window.saturating_mul(l + 1);
    if window == 0 {
        return Err(Error::InvalidConfig("redecode_window must be at least 1".into()));
    }
    if bits > MAX_WINDOW_BITS {
        return Err(Error::WindowTooLarge { bits, max: MAX_WINDOW_BITS });
    }
    Ok(())
}

/// Decodes a whole run of flow outputs (one vector of `theta` outputs per
/// chunk) with a [`FlowDecoder`] and returns the final estimate.
pub fn flow_decode(code: &FlowCode, outputs: &[Vec<u8>], window: u32) -> Result<Vec<FlowMessage>> {
    let mut dec = FlowDecoder::new(code.clone(), window)?;
    for o in outputs {
        dec.push(o.clone());
    }
    Ok(dec.estimate.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim_anytime::codebook::Cdf;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn send(ch: &Channel, code: &FlowCode, history: &[FlowMessage], rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
        (0..history.len() as u64)
            .map(|j| {
                flow_encode(code, history, j).into_iter().map(|x| Cdf::new(ch.row(x)).sample(rng.gen()) as u8).collect()
            })
            .collect()
    }

    fn random_history(len: usize, l: u32, rng: &mut ChaCha8Rng) -> Vec<FlowMessage> {
        (0..len).map(|_| FlowMessage::from_index(rng.gen_range(0..(1 << l) + 1))).collect()
    }

    #[test]
    fn bits_round_trip() {
        for l in 0..4 {
            assert_eq!(FlowMessage::Deny.to_bits(l).len(), l as usize + 1);
            for i in 0..(1 << l) {
                let m = FlowMessage::Confirm(i);
                assert_eq!(FlowMessage::from_bits(&m.to_bits(l)), m);
            }
        }
        assert_eq!(FlowMessage::from_bits(&FlowMessage::Deny.to_bits(2)), FlowMessage::Deny);
    }

    #[test]
    fn tree_code_is_causal_and_deterministic() {
        let ch = Channel::bsc(0.1).unwrap();
        let code = FlowCode::new(&ch, &[0.5, 0.5], 6, 1, 4).unwrap();
        let a = [FlowMessage::Deny, FlowMessage::Confirm(1), FlowMessage::Deny, FlowMessage::Confirm(0)];
        let mut b = a;
        b[2] = FlowMessage::Confirm(0);
        for j in 0..2 {
            assert_eq!(flow_encode(&code, &a, j), flow_encode(&code, &b, j));
        }
        assert_eq!(flow_encode(&code, &a, 3), flow_encode(&code, &a, 3));
    }

    #[test]
    fn diverged_letters_agree_at_collision_rate() {
        let ch = Channel::bsc(0.1).unwrap();
        let q = [0.3, 0.7];
        let mut agree = 0u32;
        let pairs = 10_000u64;
        for seed in 0..pairs {
            let code = FlowCode::new(&ch, &q, 1, 1, seed).unwrap();
            let a = [FlowMessage::Deny, FlowMessage::Confirm(0)];
            let b = [FlowMessage::Deny, FlowMessage::Confirm(1)];
            if flow_encode(&code, &a, 1) == flow_encode(&code, &b, 1) {
                agree += 1;
            }
        }
        let expected = 0.3f64 * 0.3 + 0.7 * 0.7;
        let f = agree as f64 / pairs as f64;
        // 4 standard errors
        assert!((f - expected).abs() < 4.0 * (expected * (1.0 - expected) / pairs as f64).sqrt(), "{f}");
    }

    #[test]
    fn noiseless_flow_decodes_exactly() {
        let ch = Channel::noiseless(2).unwrap();
        let code = FlowCode::new(&ch, &[0.5, 0.5], 4, 2, 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let history = random_history(30, 2, &mut rng);
        let y = send(&ch, &code, &history, &mut rng);
        assert_eq!(flow_decode(&code, &y, 3).unwrap(), history);
    }

    #[test]
    fn unit_window_binary_test() {
        let ch = Channel::bsc(0.01).unwrap();
        let code = FlowCode::new(&ch, &[0.5, 0.5], 12, 0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let history = random_history(50, 0, &mut rng);
        let y = send(&ch, &code, &history, &mut rng);
        assert_eq!(flow_decode(&code, &y, 1).unwrap(), history);
    }

    #[test]
    fn window_cap() {
        let ch = Channel::bsc(0.1).unwrap();
        let code = FlowCode::new(&ch, &[0.5, 0.5], 2, 2, 0).unwrap();
        assert!(matches!(FlowDecoder::new(code.clone(), 9), Err(Error::WindowTooLarge { .. })));
        assert!(FlowDecoder::new(code, 8).is_ok());
    }

    #[test]
    fn ml_search_matches_brute_force() {
        let ch = Channel::bsc(0.2).unwrap();
        let code = FlowCode::new(&ch, &[0.5, 0.5], 2, 1, 77).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let history = random_history(3, 1, &mut rng);
        let y = send(&ch, &code, &history, &mut rng);
        let est = flow_decode(&code, &y, 3).unwrap();
        let ll = |h: &[FlowMessage]| -> f64 {
            let mut p = code.root();
            (0..3)
                .map(|j| {
                    p = code.chain(p, j as u64, h[j]);
                    code.chunk_loglik(j as u64, p, &y[j])
                })
                .sum()
        };
        let mut best = (f64::NEG_INFINITY, vec![]);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let h: Vec<FlowMessage> = [a, b, c].iter().map(|&i| FlowMessage::from_index(i)).collect();
                    let v = ll(&h);
                    if v > best.0 {
                        best = (v, h);
                    }
                }
            }
        }
        assert_eq!(est, best.1);
    }

    #[test]
    fn prefix_errors_fade_with_age() {
        // Per-chunk error rate of the current estimate, by age of the chunk.
        let ch = Channel::bsc(0.05).unwrap();
        let window = 4;
        let mut wrong_by_age = [0u32; 4];
        let trials = 400u64;
        for seed in 0..trials {
            let code = FlowCode::new(&ch, &[0.5, 0.5], 3, 1, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
            let history = random_history(12, 1, &mut rng);
            let y = send(&ch, &code, &history, &mut rng);
            let mut dec = FlowDecoder::new(code, window).unwrap();
            for (j, o) in y.into_iter().enumerate() {
                let est = dec.push(o).to_vec();
                if j >= 6 {
                    for (age, w) in wrong_by_age.iter_mut().enumerate() {
                        if est[j - age] != history[j - age] {
                            *w += 1;
                        }
                    }
                }
            }
        }
        assert!(wrong_by_age[0] > wrong_by_age[3], "{wrong_by_age:?}");
        assert!(wrong_by_age[0] >= wrong_by_age[1] && wrong_by_age[1] >= wrong_by_age[2], "{wrong_by_age:?}");
    }
}
