use std::collections::HashMap;
use std::ops::Range;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::channel::capacity;
use crate::error::Result;
use crate::exponents::e0_max;
use crate::optim::{bisect_decreasing, BISECT_FTOL, BISECT_XTOL};
use crate::rng::stream;
use crate::sim_queue::{check_delays, DelayErrorRow, DelayErrorTable};
use crate::Channel;

use super::codebook::{ranked, Cdf, Codebook};
use super::flow::{FlowCode, FlowDecoder, FlowMessage};
use super::SchemeConfig;

/// Letter sent on data uses while no block is in flight.
pub const IDLE_LETTER: usize = 0;

/// Knobs beyond the scheme configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Deliver punctuation perfectly even though `theta` uses are spent on it.
    pub noiseless_flow: bool,
    /// Chunks during which the decoder parses with a deliberately wrong
    /// estimate of the undecided punctuation. Tree-coded flow only.
    pub corrupt_chunks: Option<Range<u64>>,
    /// Record every counted deadline decision.
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Correct,
    Wrong,
    /// Not yet decoded at the deadline; a fair guess is emitted.
    Missed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitOutcome {
    pub bit: u64,
    pub delay: u64,
    /// 0-based channel use at whose end the bit was emitted.
    pub deadline: u64,
    pub outcome: Outcome,
}

/// Counters describing one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub chunks: u64,
    pub blocks_started: u64,
    pub confirms: u64,
    pub denies: u64,
    /// Wrong or missed deadline decisions made under correct punctuation.
    pub data_errors: u64,
    /// Wrong or missed deadline decisions made under wrong punctuation.
    pub punctuation_errors: u64,
    /// Chunk ends at which the decoder's view of the encoder queue was wrong.
    pub queue_mismatch_chunks: u64,
    /// Punctuation messages frozen at a wrong value.
    pub frozen_punctuation_errors: u64,
    pub max_queue_bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub table: DelayErrorTable,
    pub stats: RunStats,
    pub trace: Vec<BitOutcome>,
}

/// Deterministic bit arrivals at `r` bits per use: `count_by(t)` bits have
/// arrived by the end of use `t`.
#[derive(Debug, Clone, Copy)]
struct Arrivals {
    r: f64,
}

impl Arrivals {
    fn count_by(&self, t: u64) -> u64 {
        ((t + 1) as f64 * self.r + 1e-9).floor() as u64
    }

    fn arrival_use(&self, i: u64) -> u64 {
        let mut t = (((i + 1) as f64 / self.r).ceil() as u64).saturating_sub(1);
        while t > 0 && self.count_by(t - 1) > i {
            t -= 1;
        }
        while self.count_by(t) <= i {
            t += 1;
        }
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Active {
    id: u64,
    start_bit: u64,
    first_data: u64,
}

/// Queue bookkeeping that both ends can run: which block is in flight and
/// how many bits have been removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Parse {
    removed: u64,
    active: Option<Active>,
    next_block: u64,
}

struct Layout {
    c: u64,
    data_per_chunk: u64,
    k: u64,
    list: usize,
    arrivals: Arrivals,
}

impl Layout {
    fn use_of(&self, chunk: u64, offset: u64) -> u64 {
        chunk * self.c + offset
    }

    fn data_index(&self, chunk: u64, offset: u64) -> u64 {
        chunk * self.data_per_chunk + offset
    }

    /// Starts a block at this data use if none is in flight and enough bits wait.
    fn maybe_start(&self, p: &mut Parse, chunk: u64, offset: u64) -> bool {
        if p.active.is_none() && self.arrivals.count_by(self.use_of(chunk, offset)) >= p.removed + self.k {
            p.active =
                Some(Active { id: p.next_block, start_bit: p.removed, first_data: self.data_index(chunk, offset) });
            p.next_block += 1;
            return true;
        }
        false
    }
}

struct Decoder<'a> {
    layout: &'a Layout,
    codebook: &'a Codebook,
    frozen: Parse,
    frozen_chunks: u64,
    /// Bits `0..frozen.removed`.
    decoded: Vec<u8>,
    current: Parse,
    /// Payloads confirmed after the frozen point, in order.
    overlay: Vec<u32>,
    cache: HashMap<(u64, u64, u64, u64), Vec<u32>>,
}

impl<'a> Decoder<'a> {
    fn new(layout: &'a Layout, codebook: &'a Codebook) -> Self {
        Self {
            layout,
            codebook,
            frozen: Parse::default(),
            frozen_chunks: 0,
            decoded: Vec::new(),
            current: Parse::default(),
            overlay: Vec::new(),
            cache: HashMap::new(),
        }
    }

    /// Replays chunk `chunk` under `msg`; returns a confirmed payload.
    fn apply(&mut self, p: &mut Parse, chunk: u64, msg: FlowMessage, outputs: &[u8]) -> Option<u32> {
        for o in 0..self.layout.data_per_chunk {
            self.layout.maybe_start(p, chunk, o);
        }
        let (FlowMessage::Confirm(idx), Some(a)) = (msg, p.active) else {
            return None;
        };
        let end = self.layout.data_index(chunk + 1, 0);
        let key = (a.id, a.start_bit, a.first_data, end);
        let (codebook, list) = (self.codebook, self.layout.list);
        let ranked_list = self
            .cache
            .entry(key)
            .or_insert_with(|| ranked(&codebook.scores(a.id, &outputs[a.first_data as usize..end as usize]), list));
        let payload = *ranked_list.get(idx as usize)?;
        p.removed += self.layout.k;
        p.active = None;
        Some(payload)
    }

    /// Re-parses from the frozen point. `estimate[..frozen_count]` is final.
    fn update(&mut self, estimate: &[FlowMessage], frozen_count: u64, outputs: &[u8]) {
        let k = self.layout.k as u32;
        while self.frozen_chunks < frozen_count {
            let mut p = self.frozen;
            let j = self.frozen_chunks;
            if let Some(payload) = self.apply(&mut p, j, estimate[j as usize], outputs) {
                self.decoded.extend((0..k).rev().map(|b| ((payload >> b) & 1) as u8));
            }
            self.frozen = p;
            self.frozen_chunks += 1;
        }
        let mut p = self.frozen;
        self.overlay.clear();
        for j in frozen_count..estimate.len() as u64 {
            if let Some(payload) = self.apply(&mut p, j, estimate[j as usize], outputs) {
                self.overlay.push(payload);
            }
        }
        self.current = p;
    }

    fn bit(&self, i: u64) -> Option<u8> {
        if i < self.frozen.removed {
            return Some(self.decoded[i as usize]);
        }
        let off = i - self.frozen.removed;
        let k = self.layout.k;
        let payload = *self.overlay.get((off / k) as usize)?;
        Some(((payload >> (k - 1 - off % k)) & 1) as u8)
    }
}

fn sample(cdf: &Cdf, rng: &mut ChaCha8Rng) -> u8 {
    cdf.sample(rng.gen::<f64>()) as u8
}

/// Input distribution for data codewords at `rate` nats per data use: the
/// maximizer of `E0(eta)` where `E0(eta)/eta = rate`, or the capacity-achieving
/// one at or above capacity.
pub fn data_input_distribution(ch: &Channel, rate: f64) -> Vec<f64> {
    if ch.is_symmetric() {
        return vec![1.0 / ch.inputs() as f64; ch.inputs()];
    }
    let cap = capacity(ch);
    if rate >= cap.value {
        return cap.q.into_vec();
    }
    let per_eta = |eta: f64| e0_max(ch, eta).value / eta;
    let mut hi = 1.0;
    while per_eta(hi) >= rate && hi < 1e6 {
        hi *= 2.0;
    }
    let eta = bisect_decreasing(per_eta, rate, 1e-9, hi, BISECT_XTOL, BISECT_FTOL);
    e0_max(ch, eta).q.map(|q| q.into_vec()).unwrap_or_else(|| cap.q.into_vec())
}

pub(crate) fn run(
    cfg: &SchemeConfig,
    ch: &Channel,
    horizon: u64,
    delays: &[u64],
    seed: u64,
    opts: &RunOptions,
    tree_flow: bool,
) -> Result<RunReport> {
    cfg.validate()?;
    let delays = check_delays(delays, horizon)?;
    let max_delay = *delays.last().unwrap();

    let c = cfg.c as u64;
    let theta = cfg.theta as u64;
    let layout = Layout {
        c,
        data_per_chunk: c - theta,
        k: cfg.payload_bits() as u64,
        list: 1usize << cfg.l,
        arrivals: Arrivals { r: cfg.rate_bits },
    };
    let data_rate = cfg.rate_nats() * c as f64 / (c - theta) as f64;
    let codebook = Codebook::new(ch, &data_input_distribution(ch, data_rate), cfg.payload_bits(), cfg.seed)?;
    let flow_code = if tree_flow && !opts.noiseless_flow {
        let q = e0_max(ch, 1.0).q.map(|q| q.into_vec()).unwrap_or_else(|| vec![1.0 / ch.inputs() as f64; ch.inputs()]);
        Some(FlowCode::new(ch, &q, cfg.theta, cfg.l, cfg.seed)?)
    } else {
        None
    };
    let mut flow_decoder = match &flow_code {
        Some(code) => Some(FlowDecoder::new(code.clone(), cfg.redecode_window)?),
        None => None,
    };

    let chunks = horizon / c;
    let span = chunks * c;
    let total_bits = layout.arrivals.count_by(span - 1);
    let counted = |a: u64| a >= max_delay && a + max_delay < span;

    let mut bit_rng = stream(seed, 3);
    let bits: Vec<u8> = (0..total_bits).map(|_| bit_rng.gen::<bool>() as u8).collect();
    let mut data_rng = stream(seed, 1);
    let mut flow_rng = stream(seed, 2);
    let rows: Vec<Cdf> = ch.rows().map(Cdf::new).collect();

    let mut enc = Parse::default();
    let mut enc_scores: Vec<f64> = Vec::new();
    let mut enc_payload = 0u32;
    let mut flow_prefix = flow_code.as_ref().map(|f| f.root()).unwrap_or(0);

    let mut data_out: Vec<u8> = Vec::with_capacity((chunks * layout.data_per_chunk) as usize);
    let mut truth: Vec<FlowMessage> = Vec::with_capacity(chunks as usize);
    let mut dec = Decoder::new(&layout, &codebook);
    let mut frozen_ok = true;

    let mut stats = RunStats { chunks, ..RunStats::default() };
    let mut trace = Vec::new();
    let mut ptr = vec![0u64; delays.len()];
    let mut wrong = vec![0u64; delays.len()];
    let mut missed = vec![0u64; delays.len()];
    let mut trials = vec![0u64; delays.len()];

    let mut evaluate = |dec: &Decoder, before: u64, punct_ok: bool, stats: &mut RunStats| {
        for (di, &d) in delays.iter().enumerate() {
            while ptr[di] < total_bits {
                let i = ptr[di];
                let a = layout.arrivals.arrival_use(i);
                if a + d >= before {
                    break;
                }
                ptr[di] += 1;
                if !counted(a) {
                    continue;
                }
                trials[di] += 1;
                let outcome = match dec.bit(i) {
                    Some(b) if b == bits[i as usize] => Outcome::Correct,
                    Some(_) => Outcome::Wrong,
                    None => Outcome::Missed,
                };
                match outcome {
                    Outcome::Correct => {}
                    Outcome::Wrong => wrong[di] += 1,
                    Outcome::Missed => missed[di] += 1,
                }
                if outcome != Outcome::Correct {
                    if punct_ok {
                        stats.data_errors += 1;
                    } else {
                        stats.punctuation_errors += 1;
                    }
                }
                if opts.trace {
                    trace.push(BitOutcome { bit: i, delay: d, deadline: a + d, outcome });
                }
            }
        }
    };

    // Deadlines before the first chunk ends see an empty parse.
    evaluate(&dec, c - 1, true, &mut stats);

    for j in 0..chunks {
        for o in 0..layout.data_per_chunk {
            if layout.maybe_start(&mut enc, j, o) {
                let a = enc.active.unwrap();
                enc_scores = vec![0.0; codebook.candidates() as usize];
                enc_payload = (0..layout.k).fold(0u32, |acc, b| (acc << 1) | bits[(a.start_bit + b) as usize] as u32);
                stats.blocks_started += 1;
            }
            let x = match enc.active {
                Some(a) => codebook.symbol(a.id, enc_payload, layout.data_index(j, o) - a.first_data),
                None => IDLE_LETTER,
            };
            let y = sample(&rows[x], &mut data_rng);
            if let Some(a) = enc.active {
                codebook.accumulate(&mut enc_scores, a.id, layout.data_index(j, o) - a.first_data, y as usize);
            }
            data_out.push(y);
        }

        // The encoder runs the decoder's list decoding on the fed-back outputs.
        let msg = match enc.active {
            Some(_) => {
                let rank = Codebook::rank_of(&enc_scores, enc_payload);
                if rank < layout.list {
                    enc.removed += layout.k;
                    enc.active = None;
                    stats.confirms += 1;
                    FlowMessage::Confirm(rank as u32)
                } else {
                    stats.denies += 1;
                    FlowMessage::Deny
                }
            }
            None => FlowMessage::Deny,
        };
        truth.push(msg);

        let punct_ok = match (&flow_code, &mut flow_decoder) {
            (Some(code), Some(fd)) => {
                flow_prefix = code.chain(flow_prefix, j, msg);
                let y: Vec<u8> =
                    code.letters(j, flow_prefix).into_iter().map(|x| sample(&rows[x], &mut flow_rng)).collect();
                let before = fd.frozen().len();
                let mut estimate = fd.push(y).to_vec();
                let frozen_count = fd.frozen().len();
                for f in before..frozen_count {
                    if estimate[f] != truth[f] {
                        frozen_ok = false;
                        stats.frozen_punctuation_errors += 1;
                    }
                }
                if opts.corrupt_chunks.as_ref().is_some_and(|r| r.contains(&j)) {
                    for m in &mut estimate[frozen_count..] {
                        *m = match *m {
                            FlowMessage::Deny => FlowMessage::Confirm(0),
                            FlowMessage::Confirm(_) => FlowMessage::Deny,
                        };
                    }
                }
                dec.update(&estimate, frozen_count as u64, &data_out);
                frozen_ok && estimate[frozen_count..] == truth[frozen_count..]
            }
            _ => {
                dec.update(&truth, truth.len() as u64, &data_out);
                true
            }
        };

        if dec.current != enc {
            stats.queue_mismatch_chunks += 1;
        }
        let queued = layout.arrivals.count_by(layout.use_of(j + 1, 0) - 1) - enc.removed;
        stats.max_queue_bits = stats.max_queue_bits.max(queued);

        let next_end = if j + 1 < chunks { layout.use_of(j + 2, 0) - 1 } else { u64::MAX };
        evaluate(&dec, next_end, punct_ok, &mut stats);
    }

    let rows = delays
        .iter()
        .enumerate()
        .map(|(di, &d)| DelayErrorRow::from_counts(d, trials[di], wrong[di], missed[di]))
        .collect();
    Ok(RunReport { table: DelayErrorTable { rows }, stats, trace })
}
