//! Desk-scale simulation of the superposition/binning achievability
//! scheme: layered random codebooks, typicality encoding with uniform
//! tie-breaks, exhaustive in-bin joint-typicality decoding, and exact
//! equivocation accounting by posterior enumeration at small blocklength.
//!
//! Randomness is organized as counter-based streams of one seeded
//! generator, one stream per role (codebook, source, each encoder), with
//! fixed word offsets per key (trial index, observed sequence). Every
//! component can therefore be replayed independently: encoders are
//! deterministic functions of their input sequence given the seed, which
//! is what makes exact equivocation enumeration meaningful.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::prob::{chain_join, JointDist, SourceSpec, Var};
use crate::regions::{AuxConfig, RateSplit, XhatMap};
use crate::Result;

/// Default cap on exact-enumeration cost (arithmetic operations plus table
/// cells, order of magnitude). Binary alphabets up to blocklength 8 fit.
pub const DEFAULT_ENUM_CAP: f64 = 2.5e8;

/// Typicality slack on empirical frequencies; 0.15 is tuned for
/// blocklength 8 over binary alphabets (one letter of slack per cell).
pub const DEFAULT_DELTA: f64 = 0.15;

const STREAM_CODEBOOK: u64 = 1;
const STREAM_SOURCE: u64 = 2;
const STREAM_ENCODER: [u64; 2] = [3, 4];
/// Words reserved per key within a stream; bounds the draws any single
/// encode call or trial may consume.
const WORDS_PER_KEY: u128 = 256;

/// Simulation configuration.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    /// Blocklength.
    pub n: usize,
    /// Absolute slack on empirical cell frequencies for typicality; cells
    /// of zero probability must stay empty regardless.
    pub delta: f64,
    /// Transmitted bin rates `(R_V1, R_U1, R_V2, R_U2)`, bits/symbol.
    pub rates: RateSplit,
    pub trials: usize,
    pub seed: u64,
    /// Exponent slacks: codebook sizes use `[0]` (coarse) and `[2]`
    /// (refinement); bin counts use `[1]` and `[3]`.
    pub eps: [f64; 4],
    /// Draw refinement codewords from `p(u|v)` letter-wise instead of the
    /// plain `U` marginal. Off by default: the scheme specifies marginal
    /// draws, this switch is a deliberate extension.
    pub conditional_refinement: bool,
    /// Enumeration cost cap for codebook material and exact equivocation.
    pub enum_cap: f64,
}

impl SimConfig {
    pub fn new(n: usize, rates: RateSplit, trials: usize, seed: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Infeasible("blocklength must be >= 1".into()));
        }
        Ok(Self {
            n,
            delta: DEFAULT_DELTA,
            rates,
            trials,
            seed,
            eps: [0.0; 4],
            conditional_refinement: false,
            enum_cap: DEFAULT_ENUM_CAP,
        })
    }
}

/// Contiguous near-equal binning of `0..count` into `bins` bins; sizes
/// differ by at most one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Binning {
    pub count: usize,
    pub bins: usize,
}

impl Binning {
    pub fn bin_of(&self, idx: usize) -> usize {
        debug_assert!(idx < self.count);
        let base = self.count / self.bins;
        let rem = self.count % self.bins;
        let cutoff = rem * (base + 1);
        if idx < cutoff {
            idx / (base + 1)
        } else {
            rem + (idx - cutoff) / base.max(1)
        }
    }

    /// Start index and length of a bin's block.
    pub fn members(&self, bin: usize) -> (usize, usize) {
        debug_assert!(bin < self.bins);
        let base = self.count / self.bins;
        let rem = self.count % self.bins;
        if bin < rem {
            (bin * (base + 1), base + 1)
        } else {
            (rem * (base + 1) + (bin - rem) * base, base)
        }
    }
}

/// One agent's realized codebooks and bin layout.
#[derive(Debug, Clone)]
pub struct AgentCode {
    /// Coarse codewords, `v_count × n` letters.
    pub v_codebook: Vec<Vec<u8>>,
    /// Refinement codewords per coarse index, `v_count × u_count × n`.
    // TODO: flatten into one contiguous buffer if larger alphabets are
    // ever needed; the per-codeword Vec headers dominate memory once
    // v_count * u_count reaches the millions.
    pub u_codebooks: Vec<Vec<Vec<u8>>>,
    pub v_binning: Binning,
    pub u_binning: Binning,
}

impl AgentCode {
    pub fn v_count(&self) -> usize {
        self.v_codebook.len()
    }

    pub fn u_count(&self) -> usize {
        self.u_codebooks[0].len()
    }
}

/// A dense probability table addressed by tuples of letters, in a fixed
/// variable order.
#[derive(Debug, Clone)]
pub struct TypTable {
    pub dims: Vec<usize>,
    pub probs: Vec<f64>,
}

impl TypTable {
    /// Extracts `joint`'s marginal over `order`, re-laid-out so that
    /// `order[0]` is the slowest axis.
    pub fn from_joint(joint: &JointDist, order: &[Var]) -> Result<Self> {
        let m = joint.marginal(order)?;
        let out_dims: Vec<usize> = order
            .iter()
            .map(|v| m.dim(*v).expect("axis present"))
            .collect();
        // Position of each canonical axis within the requested order.
        let slot: Vec<usize> = m
            .vars()
            .iter()
            .map(|v| order.iter().position(|w| w == v).expect("axis requested"))
            .collect();
        let mut out_strides_by_slot = vec![1usize; order.len()];
        for i in (0..order.len().saturating_sub(1)).rev() {
            out_strides_by_slot[i] = out_strides_by_slot[i + 1] * out_dims[i + 1];
        }
        let mut probs = vec![0.0f64; m.probs().len()];
        let in_dims = m.dims().to_vec();
        for (flat, &p) in m.probs().iter().enumerate() {
            let mut rest = flat;
            let mut out = 0usize;
            for i in (0..in_dims.len()).rev() {
                let coord = rest % in_dims[i];
                rest /= in_dims[i];
                out += coord * out_strides_by_slot[slot[i]];
            }
            probs[out] = p;
        }
        Ok(Self {
            dims: out_dims,
            probs,
        })
    }

    fn cell_of(&self, letters: &[u8]) -> usize {
        let mut idx = 0usize;
        for (k, &l) in letters.iter().enumerate() {
            idx = idx * self.dims[k] + l as usize;
        }
        idx
    }

    /// Strong (frequency) typicality: every cell's empirical frequency
    /// within `delta` of its probability, and zero-probability cells
    /// untouched.
    pub fn typical(&self, seqs: &[&[u8]], delta: f64) -> bool {
        let n = seqs[0].len();
        debug_assert_eq!(seqs.len(), self.dims.len());
        let mut counts = vec![0u32; self.probs.len()];
        let mut letters = vec![0u8; seqs.len()];
        for i in 0..n {
            for (k, s) in seqs.iter().enumerate() {
                letters[k] = s[i];
            }
            counts[self.cell_of(&letters)] += 1;
        }
        for (c, &p) in counts.iter().zip(self.probs.iter()) {
            if p == 0.0 {
                if *c > 0 {
                    return false;
                }
            } else if (*c as f64 / n as f64 - p).abs() > delta {
                return false;
            }
        }
        true
    }
}

/// Realized codebooks, bin maps, and the reference law they were drawn
/// against.
#[derive(Debug, Clone)]
pub struct CodeInstance {
    pub n: usize,
    pub agents: [AgentCode; 2],
    /// The full factorized law of the configuration the code targets.
    pub joint: JointDist,
    pub xhat: XhatMap,
    /// Pair laws `(V_j, Y_j)` for coarse encoding.
    pub typ_vy: [TypTable; 2],
    /// Pair laws `(U_j, Y_j)` for refinement encoding.
    pub typ_uy: [TypTable; 2],
    /// Quadruple law `(V1, U1, V2, U2)` for decoding.
    pub typ_quad: TypTable,
}

impl CodeInstance {
    /// Builds the typicality references from the joint and wraps the
    /// realized codebooks. Also the entry point for hand-planted codes in
    /// tests.
    pub fn assemble(
        n: usize,
        joint: JointDist,
        xhat: XhatMap,
        agent1: AgentCode,
        agent2: AgentCode,
    ) -> Result<Self> {
        use Var::*;
        let typ_vy = [
            TypTable::from_joint(&joint, &[V1, Y1])?,
            TypTable::from_joint(&joint, &[V2, Y2])?,
        ];
        let typ_uy = [
            TypTable::from_joint(&joint, &[U1, Y1])?,
            TypTable::from_joint(&joint, &[U2, Y2])?,
        ];
        let typ_quad = TypTable::from_joint(&joint, &[V1, U1, V2, U2])?;
        Ok(Self {
            n,
            agents: [agent1, agent2],
            joint,
            xhat,
            typ_vy,
            typ_uy,
            typ_quad,
        })
    }

    /// Number of distinct messages `(b, w)` agent `j` can emit.
    pub fn message_count(&self, j: usize) -> usize {
        self.agents[j].v_binning.bins * self.agents[j].u_binning.bins
    }
}

fn role_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn keyed_rng(seed: u64, stream: u64, key: u64) -> ChaCha8Rng {
    let mut rng = role_rng(seed, stream);
    rng.set_word_pos(key as u128 * WORDS_PER_KEY);
    rng
}

fn sample_letter(rng: &mut ChaCha8Rng, pmf: &[f64]) -> u8 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u8;
        }
    }
    (pmf.len() - 1) as u8
}

fn sample_word(rng: &mut ChaCha8Rng, pmf: &[f64], n: usize) -> Vec<u8> {
    (0..n).map(|_| sample_letter(rng, pmf)).collect()
}

/// Integer rank of a sequence over an alphabet of size `card`, big-endian.
pub fn rank_sequence(seq: &[u8], card: usize) -> u64 {
    let mut r = 0u64;
    for &l in seq {
        r = r * card as u64 + l as u64;
    }
    r
}

fn unrank_sequence(mut rank: u64, card: usize, n: usize) -> Vec<u8> {
    let mut seq = vec![0u8; n];
    for i in (0..n).rev() {
        seq[i] = (rank % card as u64) as u8;
        rank /= card as u64;
    }
    seq
}

fn all_sequences(card: usize, n: usize) -> Vec<Vec<u8>> {
    let total = (card as u64).pow(n as u32);
    (0..total).map(|r| unrank_sequence(r, card, n)).collect()
}

/// Generates the layered codebooks: coarse codewords i.i.d. letter-wise
/// from the `V_j` marginal, refinement codewords per coarse index i.i.d.
/// from the `U_j` marginal, both divided into near-equal contiguous bins.
/// Codebook sizes come from the configuration's own information rates plus
/// the exponent slacks; bin counts from the transmitted rates.
pub fn gen_code(source: &SourceSpec, aux: &AuxConfig, cfg: &SimConfig) -> Result<CodeInstance> {
    let joint = chain_join(source, aux)?;
    use Var::*;
    let n = cfg.n;

    let iv = [
        joint.mutual_info(&[V1], &[Y1], &[])?,
        joint.mutual_info(&[V2], &[Y2], &[])?,
    ];
    let iu_v = [
        joint.mutual_info(&[U1], &[Y1], &[V1])?,
        joint.mutual_info(&[U2], &[Y2], &[V2])?,
    ];
    let bin_rates = [
        (cfg.rates.rv1, cfg.rates.ru1),
        (cfg.rates.rv2, cfg.rates.ru2),
    ];

    // Count exponents. The 1e-9 slack keeps float dust in the information
    // rates (an exact zero computed as 1e-16, an exact 10.0 computed as
    // 10.000000000000002) from buying a spurious extra bit. Guarded so the
    // size arithmetic cannot overflow: a count beyond 2^40 is far past any
    // workable cap anyway.
    let exponent = |rate: f64| -> Result<u32> {
        let bits = (n as f64 * rate - 1e-9).ceil().max(0.0);
        if bits > 40.0 {
            return Err(Error::EnumerationCap {
                estimate: bits.exp2(),
                cap: cfg.enum_cap,
            });
        }
        Ok(bits as u32)
    };

    let mut cost = 0.0f64;
    let mut plans = Vec::new();
    for j in 0..2 {
        let v_count = 1usize << exponent(iv[j] + cfg.eps[0])?;
        let u_count = 1usize << exponent(iu_v[j] + cfg.eps[2])?;
        let v_bins = 1usize << exponent(bin_rates[j].0 + cfg.eps[1])?;
        let u_bins = 1usize << exponent(bin_rates[j].1 + cfg.eps[3])?;
        cost += (v_count as f64 + (v_count as f64) * (u_count as f64)) * n as f64;
        plans.push((v_count, u_count, v_bins, u_bins));
    }
    if cost > cfg.enum_cap {
        return Err(Error::EnumerationCap {
            estimate: cost,
            cap: cfg.enum_cap,
        });
    }

    let marg = |v: Var| -> Result<Vec<f64>> { Ok(joint.marginal(&[v])?.probs().to_vec()) };
    let pv = [marg(V1)?, marg(V2)?];
    let pu = [marg(U1)?, marg(U2)?];
    let pu_given_v: [Vec<Vec<f64>>; 2] = [
        conditional_rows(&joint, V1, U1)?,
        conditional_rows(&joint, V2, U2)?,
    ];

    let mut rng = role_rng(cfg.seed, STREAM_CODEBOOK);
    let mut agents = Vec::with_capacity(2);
    for j in 0..2 {
        let (v_count, u_count, v_bins, u_bins) = plans[j];
        let v_codebook: Vec<Vec<u8>> = (0..v_count)
            .map(|_| sample_word(&mut rng, &pv[j], n))
            .collect();
        let mut u_codebooks = Vec::with_capacity(v_count);
        for v_cw in &v_codebook {
            let words: Vec<Vec<u8>> = (0..u_count)
                .map(|_| {
                    if cfg.conditional_refinement {
                        (0..n)
                            .map(|i| sample_letter(&mut rng, &pu_given_v[j][v_cw[i] as usize]))
                            .collect()
                    } else {
                        sample_word(&mut rng, &pu[j], n)
                    }
                })
                .collect();
            u_codebooks.push(words);
        }
        agents.push(AgentCode {
            v_codebook,
            u_codebooks,
            v_binning: Binning {
                count: v_count,
                bins: v_bins,
            },
            u_binning: Binning {
                count: u_count,
                bins: u_bins,
            },
        });
    }
    let agent2 = agents.pop().expect("two agents");
    let agent1 = agents.pop().expect("two agents");
    CodeInstance::assemble(n, joint, aux.xhat.clone(), agent1, agent2)
}

fn conditional_rows(joint: &JointDist, given: Var, of: Var) -> Result<Vec<Vec<f64>>> {
    let order = if given < of { [given, of] } else { [of, given] };
    let pair = TypTable::from_joint(joint, &[order[0], order[1]])?;
    let (ng, no) = (
        joint.dim(given).expect("axis present"),
        joint.dim(of).expect("axis present"),
    );
    let mut rows = vec![vec![0.0f64; no]; ng];
    for g in 0..ng {
        for o in 0..no {
            let cell = if given < of { g * no + o } else { o * ng + g };
            rows[g][o] = pair.probs[cell];
        }
    }
    for row in &mut rows {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            for v in row.iter_mut() {
                *v /= s;
            }
        } else {
            let k = row.len() as f64;
            for v in row.iter_mut() {
                *v = 1.0 / k;
            }
        }
    }
    Ok(rows)
}

/// Result of one encoding pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EncodeOutcome {
    /// Chosen coarse codeword index.
    pub s: usize,
    /// Chosen refinement index within the coarse codeword's codebook.
    pub sp: usize,
    /// Transmitted bin indices.
    pub b: usize,
    pub w: usize,
    /// Whether the coarse / refinement step fell back to a uniform pick
    /// because no typical codeword existed.
    pub v_fallback: bool,
    pub u_fallback: bool,
}

/// Encodes an observation: pick a coarse codeword jointly typical with the
/// sequence (uniform tie-break, uniform fallback), then a refinement
/// codeword likewise, and transmit the two bin indices.
///
/// Deterministic per observed sequence: tie-breaks draw from a stream
/// keyed by the sequence's rank, so re-encoding the same sequence always
/// reproduces the same message.
pub fn encode(y: &[u8], agent: usize, code: &CodeInstance, cfg: &SimConfig) -> EncodeOutcome {
    let ac = &code.agents[agent];
    let ny = code.typ_vy[agent].dims[1];
    let mut rng = keyed_rng(cfg.seed, STREAM_ENCODER[agent], rank_sequence(y, ny));

    let v_candidates: Vec<usize> = (0..ac.v_count())
        .filter(|&s| code.typ_vy[agent].typical(&[&ac.v_codebook[s], y], cfg.delta))
        .collect();
    let (s, v_fallback) = match v_candidates.len() {
        0 => (rng.gen_range(0..ac.v_count()), true),
        1 => (v_candidates[0], false),
        k => (v_candidates[rng.gen_range(0..k)], false),
    };

    let u_book = &ac.u_codebooks[s];
    let u_candidates: Vec<usize> = (0..u_book.len())
        .filter(|&sp| code.typ_uy[agent].typical(&[&u_book[sp], y], cfg.delta))
        .collect();
    let (sp, u_fallback) = match u_candidates.len() {
        0 => (rng.gen_range(0..u_book.len()), true),
        1 => (u_candidates[0], false),
        k => (u_candidates[rng.gen_range(0..k)], false),
    };

    EncodeOutcome {
        s,
        sp,
        b: ac.v_binning.bin_of(s),
        w: ac.u_binning.bin_of(sp),
        v_fallback,
        u_fallback,
    }
}

/// Result of one decoding pass. Failure (no unique in-bin typical
/// quadruple) is a status, not an error; the reconstruction then falls
/// back to the all-zeros sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeOutcome {
    pub indices: Option<(usize, usize, usize, usize)>,
    pub xhat_seq: Vec<u8>,
    pub failed: bool,
}

/// Exhaustively scans the four indexed bins for a unique jointly typical
/// quadruple of codewords and applies the reconstruction map letter-wise.
pub fn decode(
    msgs: (usize, usize, usize, usize),
    code: &CodeInstance,
    cfg: &SimConfig,
) -> DecodeOutcome {
    let (b1, w1, b2, w2) = msgs;
    let a1 = &code.agents[0];
    let a2 = &code.agents[1];
    let (s1_start, s1_len) = a1.v_binning.members(b1);
    let (sp1_start, sp1_len) = a1.u_binning.members(w1);
    let (s2_start, s2_len) = a2.v_binning.members(b2);
    let (sp2_start, sp2_len) = a2.u_binning.members(w2);

    let mut found: Option<(usize, usize, usize, usize)> = None;
    'scan: for s1 in s1_start..s1_start + s1_len {
        for sp1 in sp1_start..sp1_start + sp1_len {
            for s2 in s2_start..s2_start + s2_len {
                for sp2 in sp2_start..sp2_start + sp2_len {
                    let quad = [
                        a1.v_codebook[s1].as_slice(),
                        a1.u_codebooks[s1][sp1].as_slice(),
                        a2.v_codebook[s2].as_slice(),
                        a2.u_codebooks[s2][sp2].as_slice(),
                    ];
                    if code.typ_quad.typical(&quad, cfg.delta) {
                        if found.is_some() {
                            found = None;
                            break 'scan;
                        }
                        found = Some((s1, sp1, s2, sp2));
                    }
                }
            }
        }
    }

    match found {
        Some((s1, sp1, s2, sp2)) => {
            let u1 = &a1.u_codebooks[s1][sp1];
            let u2 = &a2.u_codebooks[s2][sp2];
            let xhat_seq = (0..code.n)
                .map(|i| code.xhat.get(u1[i] as usize, u2[i] as usize) as u8)
                .collect();
            DecodeOutcome {
                indices: Some((s1, sp1, s2, sp2)),
                xhat_seq,
                failed: false,
            }
        }
        None => DecodeOutcome {
            indices: None,
            xhat_seq: vec![0u8; code.n],
            failed: true,
        },
    }
}

/// Everything recorded about one trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub x: Vec<u8>,
    pub y1: Vec<u8>,
    pub y2: Vec<u8>,
    pub e: Vec<u8>,
    pub msgs: (usize, usize, usize, usize),
    pub encoder_fallback: bool,
    pub decode_failed: bool,
    pub xhat_seq: Vec<u8>,
    /// Per-block mean distortion, in `[0, d_max]`.
    pub distortion: f64,
}

/// Aggregate simulation output.
#[derive(Debug, Clone, Serialize)]
pub struct SimSummary {
    pub trials: usize,
    /// `None` for a dry run with zero trials.
    pub mean_distortion: Option<f64>,
    /// Standard error of the distortion mean.
    pub std_error: Option<f64>,
    pub decode_failure_rate: Option<f64>,
    pub encoder_fallback_rate: Option<f64>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Generates a code and runs i.i.d. source blocks through it.
pub fn run_trials(source: &SourceSpec, aux: &AuxConfig, cfg: &SimConfig) -> Result<SimSummary> {
    let code = gen_code(source, aux, cfg)?;
    run_trials_with_code(source, &code, cfg)
}

/// As [`run_trials`] with a caller-supplied (possibly hand-planted) code.
pub fn run_trials_with_code(
    source: &SourceSpec,
    code: &CodeInstance,
    cfg: &SimConfig,
) -> Result<SimSummary> {
    let n = cfg.n;
    let mut records = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let mut rng = keyed_rng(cfg.seed, STREAM_SOURCE, trial as u64);
        let x = sample_word(&mut rng, source.px.probs(), n);
        let draw_channel = |rng: &mut ChaCha8Rng, ch: &crate::prob::CondPmf| -> Vec<u8> {
            x.iter()
                .map(|&xi| sample_letter(rng, ch.row(xi as usize).probs()))
                .collect()
        };
        let y1 = draw_channel(&mut rng, &source.py1_x);
        let y2 = draw_channel(&mut rng, &source.py2_x);
        let e = draw_channel(&mut rng, &source.pe_x);

        let enc1 = encode(&y1, 0, code, cfg);
        let enc2 = encode(&y2, 1, code, cfg);
        let outcome = decode((enc1.b, enc1.w, enc2.b, enc2.w), code, cfg);
        let distortion = (0..n)
            .map(|i| source.distortion[x[i] as usize][outcome.xhat_seq[i] as usize])
            .sum::<f64>()
            / n as f64;
        records.push(TrialRecord {
            x,
            y1,
            y2,
            e,
            msgs: (enc1.b, enc1.w, enc2.b, enc2.w),
            encoder_fallback: enc1.v_fallback
                || enc1.u_fallback
                || enc2.v_fallback
                || enc2.u_fallback,
            decode_failed: outcome.failed,
            xhat_seq: outcome.xhat_seq,
            distortion,
        });
    }

    let summary = if cfg.trials == 0 {
        SimSummary {
            trials: 0,
            mean_distortion: None,
            std_error: None,
            decode_failure_rate: None,
            encoder_fallback_rate: None,
            records,
        }
    } else {
        let t = cfg.trials as f64;
        let mean = records.iter().map(|r| r.distortion).sum::<f64>() / t;
        let var = records
            .iter()
            .map(|r| (r.distortion - mean).powi(2))
            .sum::<f64>()
            / t;
        let std_error = if cfg.trials > 1 {
            (var / (t - 1.0)).sqrt()
        } else {
            0.0
        };
        SimSummary {
            trials: cfg.trials,
            mean_distortion: Some(mean),
            std_error: Some(std_error),
            decode_failure_rate: Some(
                records.iter().filter(|r| r.decode_failed).count() as f64 / t,
            ),
            encoder_fallback_rate: Some(
                records.iter().filter(|r| r.encoder_fallback).count() as f64 / t,
            ),
            records,
        }
    };
    Ok(summary)
}

fn entropy_bits<I: Iterator<Item = f64>>(probs: I) -> f64 {
    probs
        .map(|p| if p > 0.0 { -p * p.log2() } else { 0.0 })
        .sum()
}

/// Per-input-block probability `Π p(letter_i | x_i)` of a channel output.
fn block_channel_prob(ch: &crate::prob::CondPmf, x: &[u8], out: &[u8]) -> f64 {
    x.iter()
        .zip(out.iter())
        .map(|(&xi, &oi)| ch.prob(xi as usize, oi as usize))
        .product()
}

fn block_prob(pmf: &[f64], seq: &[u8]) -> f64 {
    seq.iter().map(|&l| pmf[l as usize]).product()
}

fn check_enum_cost(
    code: &CodeInstance,
    source: &SourceSpec,
    n: usize,
    msgs: f64,
    cap: f64,
    agent: usize,
) -> Result<()> {
    let ny = code.typ_vy[agent].dims[1] as f64;
    let nx = source.nx() as f64;
    let ne = source.ne() as f64;
    let y_total = ny.powi(n as i32);
    let x_total = nx.powi(n as i32);
    let e_total = ne.powi(n as i32);
    let scan = y_total
        * (code.agents[agent].v_count() as f64 + code.agents[agent].u_count() as f64)
        * n as f64;
    let tables = x_total * (y_total + e_total * msgs.min(y_total));
    let memory = e_total * msgs;
    let estimate = scan + tables + memory;
    if estimate > cap {
        return Err(Error::EnumerationCap { estimate, cap });
    }
    Ok(())
}

/// Exact per-symbol equivocation `(1/n)·H(X^n | f_j(Y_j^n), E^n)` of the
/// realized encoder, by full enumeration of the induced law of
/// `(X^n, E^n, message)`.
pub fn exact_equivocation(
    source: &SourceSpec,
    code: &CodeInstance,
    agent: usize,
    cfg: &SimConfig,
) -> Result<f64> {
    let n = cfg.n;
    let msg_count = code.message_count(agent);
    check_enum_cost(code, source, n, msg_count as f64, cfg.enum_cap, agent)?;

    let ny = code.typ_vy[agent].dims[1];
    let u_bins = code.agents[agent].u_binning.bins;
    let y_seqs = all_sequences(ny, n);
    // The realized encoder as a lookup table over observation ranks.
    let f: Vec<usize> = y_seqs
        .iter()
        .map(|y| {
            let enc = encode(y, agent, code, cfg);
            enc.b * u_bins + enc.w
        })
        .collect();

    let ch_y = if agent == 0 {
        &source.py1_x
    } else {
        &source.py2_x
    };
    let x_seqs = all_sequences(source.nx(), n);
    let e_seqs = all_sequences(source.ne(), n);

    // Per-symbol H(X, E), exact.
    let mut h_xe_symbol = 0.0;
    for x in 0..source.nx() {
        for e in 0..source.ne() {
            let p = source.px.probs()[x] * source.pe_x.prob(x, e);
            if p > 0.0 {
                h_xe_symbol -= p * p.log2();
            }
        }
    }

    let mut h_j_given_x = 0.0f64;
    let mut p_em = vec![0.0f64; e_seqs.len() * msg_count];
    let mut q = vec![0.0f64; msg_count];
    for x in &x_seqs {
        let px = block_prob(source.px.probs(), x);
        if px == 0.0 {
            continue;
        }
        for v in q.iter_mut() {
            *v = 0.0;
        }
        for (y, &m) in y_seqs.iter().zip(f.iter()) {
            q[m] += block_channel_prob(ch_y, x, y);
        }
        h_j_given_x += px * entropy_bits(q.iter().copied());
        let support: Vec<(usize, f64)> = q
            .iter()
            .enumerate()
            .filter(|(_, &qm)| qm > 0.0)
            .map(|(m, &qm)| (m, qm))
            .collect();
        for (e_rank, e) in e_seqs.iter().enumerate() {
            let pe = block_channel_prob(&source.pe_x, x, e);
            if pe == 0.0 {
                continue;
            }
            let scale = px * pe;
            for &(m, qm) in &support {
                p_em[e_rank * msg_count + m] += scale * qm;
            }
        }
    }
    let h_em = entropy_bits(p_em.iter().copied());

    // H(X^n | J, E^n) = H(X^n, E^n) + H(J | X^n) - H(E^n, J).
    Ok((n as f64 * h_xe_symbol + h_j_given_x - h_em) / n as f64)
}

/// Report of the realized-codebook check that the coarse index leaks at
/// most `n·(H(E|V) + eps)` bits about the eavesdropper's sequence.
#[derive(Debug, Clone, Serialize)]
pub struct CoarseLeakReport {
    /// Exact `H(E^n | s_1)` of the realized agent-1 coarse encoder.
    pub h_en_given_s: f64,
    /// Per-symbol `H(E | V_1)` of the target law.
    pub h_e_given_v: f64,
    pub eps: f64,
    /// `n·(H(E|V1) + eps) - H(E^n | s_1)`; non-negative when the bound
    /// holds at this blocklength. The bound is asymptotic, so the slack is
    /// reported, not asserted.
    pub slack: f64,
    pub holds: bool,
}

/// Computes `H(E^n | s_1)` exactly for the realized agent-1 coarse
/// selection and reports the slack against `n·(H(E|V1) + eps)`.
pub fn coarse_leak_check(
    source: &SourceSpec,
    code: &CodeInstance,
    cfg: &SimConfig,
    eps: f64,
) -> Result<CoarseLeakReport> {
    let n = cfg.n;
    let v_count = code.agents[0].v_count();
    check_enum_cost(code, source, n, v_count as f64, cfg.enum_cap, 0)?;

    let ny = code.typ_vy[0].dims[1];
    let y_seqs = all_sequences(ny, n);
    let phi: Vec<usize> = y_seqs.iter().map(|y| encode(y, 0, code, cfg).s).collect();

    let x_seqs = all_sequences(source.nx(), n);
    let e_seqs = all_sequences(source.ne(), n);

    let mut p_es = vec![0.0f64; e_seqs.len() * v_count];
    let mut q = vec![0.0f64; v_count];
    for x in &x_seqs {
        let px = block_prob(source.px.probs(), x);
        if px == 0.0 {
            continue;
        }
        for v in q.iter_mut() {
            *v = 0.0;
        }
        for (y, &s) in y_seqs.iter().zip(phi.iter()) {
            q[s] += block_channel_prob(&source.py1_x, x, y);
        }
        let support: Vec<(usize, f64)> = q
            .iter()
            .enumerate()
            .filter(|(_, &qs)| qs > 0.0)
            .map(|(s, &qs)| (s, qs))
            .collect();
        for (e_rank, e) in e_seqs.iter().enumerate() {
            let pe = block_channel_prob(&source.pe_x, x, e);
            if pe == 0.0 {
                continue;
            }
            let scale = px * pe;
            for &(s, qs) in &support {
                p_es[e_rank * v_count + s] += scale * qs;
            }
        }
    }

    let h_es = entropy_bits(p_es.iter().copied());
    let mut p_s = vec![0.0f64; v_count];
    for e_rank in 0..e_seqs.len() {
        for s in 0..v_count {
            p_s[s] += p_es[e_rank * v_count + s];
        }
    }
    let h_s = entropy_bits(p_s.iter().copied());
    let h_en_given_s = h_es - h_s;

    let h_e_given_v = code.joint.entropy(&[Var::E], &[Var::V1])?;
    let bound = n as f64 * (h_e_given_v + eps);
    Ok(CoarseLeakReport {
        h_en_given_s,
        h_e_given_v,
        eps,
        slack: bound - h_en_given_s,
        // Grace for float dust at exact-equality boundaries (eps = 0 with
        // an uninformative coarse layer).
        holds: h_en_given_s <= bound + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{CondPmf, Pmf};

    fn binary_identity_aux() -> AuxConfig {
        AuxConfig::new(
            CondPmf::identity(2),
            CondPmf::identity(2),
            CondPmf::constant(2),
            CondPmf::constant(2),
            XhatMap::new(vec![0, 0, 1, 1], 2, 2),
        )
        .unwrap()
    }

    /// A planted agent code whose refinement codebook enumerates every
    /// binary sequence once, under a single coarse codeword, with
    /// singleton bins: the encoder becomes the identity map.
    fn exhaustive_agent(n: usize) -> AgentCode {
        let total = 1usize << n;
        AgentCode {
            v_codebook: vec![vec![0u8; n]],
            u_codebooks: vec![all_sequences(2, n)],
            v_binning: Binning { count: 1, bins: 1 },
            u_binning: Binning {
                count: total,
                bins: total,
            },
        }
    }

    fn identity_code(source: &SourceSpec, n: usize) -> CodeInstance {
        let aux = binary_identity_aux();
        let joint = chain_join(source, &aux).unwrap();
        CodeInstance::assemble(
            n,
            joint,
            aux.xhat.clone(),
            exhaustive_agent(n),
            exhaustive_agent(n),
        )
        .unwrap()
    }

    fn flat_rates(rv: f64, ru: f64) -> RateSplit {
        RateSplit {
            rv1: rv,
            ru1: ru,
            rv2: rv,
            ru2: ru,
        }
    }

    #[test]
    fn binning_partitions_with_near_equal_sizes() {
        for (count, bins) in [(10, 3), (7, 7), (5, 8), (16, 4), (1, 1)] {
            let b = Binning { count, bins };
            let mut seen = vec![0usize; count];
            let mut sizes = vec![0usize; bins];
            for bin in 0..bins {
                let (start, len) = b.members(bin);
                sizes[bin] = len;
                for idx in start..start + len {
                    assert_eq!(b.bin_of(idx), bin);
                    seen[idx] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1), "partition broken");
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(hi - lo <= 1, "sizes {sizes:?}");
        }
    }

    #[test]
    fn gen_code_is_deterministic_and_rate_zero_means_one_bin() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = binary_identity_aux();
        let cfg = SimConfig::new(4, flat_rates(0.0, 0.5), 0, 7).unwrap();
        let a = gen_code(&source, &aux, &cfg).unwrap();
        let b = gen_code(&source, &aux, &cfg).unwrap();
        assert_eq!(a.agents[0].v_codebook, b.agents[0].v_codebook);
        assert_eq!(a.agents[1].u_codebooks, b.agents[1].u_codebooks);
        // Zero coarse rate: a single bin holds every coarse codeword.
        assert_eq!(a.agents[0].v_binning.bins, 1);
    }

    #[test]
    fn conditional_refinement_draws_follow_the_parent() {
        // With the coarse layer equal to the refinement (identity
        // p(v|u)), conditional drawing pins every refinement codeword to
        // its parent letter for letter; marginal drawing does not.
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = AuxConfig::new(
            CondPmf::identity(2),
            CondPmf::identity(2),
            CondPmf::identity(2),
            CondPmf::identity(2),
            XhatMap::new(vec![0, 0, 1, 1], 2, 2),
        )
        .unwrap();
        let mut cfg = SimConfig::new(4, flat_rates(0.5, 0.5), 0, 9).unwrap();
        cfg.eps = [0.0, 0.0, 0.25, 0.0];
        cfg.conditional_refinement = true;
        let code = gen_code(&source, &aux, &cfg).unwrap();
        for (v_cw, u_book) in code.agents[0]
            .v_codebook
            .iter()
            .zip(code.agents[0].u_codebooks.iter())
        {
            for u_cw in u_book {
                assert_eq!(u_cw, v_cw);
            }
        }

        cfg.conditional_refinement = false;
        let code = gen_code(&source, &aux, &cfg).unwrap();
        let any_free = code.agents[0]
            .v_codebook
            .iter()
            .zip(code.agents[0].u_codebooks.iter())
            .any(|(v_cw, u_book)| u_book.iter().any(|u_cw| u_cw != v_cw));
        assert!(any_free, "marginal draws should not track the parent");
    }

    #[test]
    fn gen_code_rejects_oversized_enumerations() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = binary_identity_aux();
        let mut cfg = SimConfig::new(40, flat_rates(1.0, 1.0), 0, 7).unwrap();
        cfg.eps = [0.0, 0.0, 0.5, 0.0];
        let err = gen_code(&source, &aux, &cfg).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { .. }), "{err}");
    }

    #[test]
    fn codebook_letter_frequencies_match_the_marginal() {
        // 2^10 refinement codewords; empirical letter frequencies within
        // three multinomial sigmas of the target marginal.
        let source = SourceSpec::binary_symmetric(0.2, 0.3);
        let aux = binary_identity_aux();
        let mut cfg = SimConfig::new(8, flat_rates(0.0, 1.25), 0, 11).unwrap();
        cfg.eps = [0.0, 0.0, 0.25, 0.0];
        let code = gen_code(&source, &aux, &cfg).unwrap();
        assert_eq!(code.agents[0].u_count(), 1 << 10);
        let letters: usize = 8 * (1 << 10);
        let ones: usize = code.agents[0].u_codebooks[0]
            .iter()
            .map(|w| w.iter().filter(|&&l| l == 1).count())
            .sum();
        let p = 0.5; // uniform refinement marginal
        let sigma = (p * (1.0 - p) / letters as f64).sqrt();
        let freq = ones as f64 / letters as f64;
        assert!(
            (freq - p).abs() <= 3.0 * sigma,
            "freq {freq} vs {p} (sigma {sigma})"
        );
    }

    #[test]
    fn encode_identity_code_transmits_the_observation() {
        // Blocklength 1 with a generous slack: the zero-probability rule
        // alone pins the codeword to the observation.
        let source = SourceSpec::binary_symmetric(0.0, 0.3);
        let code = identity_code(&source, 1);
        let mut cfg = SimConfig::new(1, flat_rates(0.0, 1.0), 0, 3).unwrap();
        cfg.delta = 1.0;
        for y in [vec![0u8], vec![1u8]] {
            let out = encode(&y, 0, &code, &cfg);
            assert!(!out.u_fallback);
            assert_eq!(out.w, y[0] as usize);
        }
    }

    #[test]
    fn encode_falls_back_uniformly_when_nothing_is_typical() {
        // One coarse codeword of all zeros against an all-ones observation
        // and a tight slack: no typical pick exists.
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = binary_identity_aux();
        let joint = chain_join(&source, &aux).unwrap();
        let n = 4;
        let agent = AgentCode {
            v_codebook: vec![vec![0u8; n]],
            u_codebooks: vec![vec![vec![0u8; n], vec![0u8; n]]],
            v_binning: Binning { count: 1, bins: 1 },
            u_binning: Binning { count: 2, bins: 2 },
        };
        let code =
            CodeInstance::assemble(n, joint, aux.xhat.clone(), agent.clone(), agent).unwrap();
        let mut cfg = SimConfig::new(n, flat_rates(0.0, 0.5), 0, 3).unwrap();
        cfg.delta = 0.05;
        let out = encode(&[1, 1, 1, 1], 0, &code, &cfg);
        assert!(out.u_fallback);
        assert!(out.sp < 2 && out.b == 0);
        // Replay determinism.
        assert_eq!(out, encode(&[1, 1, 1, 1], 0, &code, &cfg));
    }

    #[test]
    fn decode_recovers_a_planted_quadruple() {
        let source = SourceSpec::binary_symmetric(0.05, 0.3);
        let n = 4;
        let code = identity_code(&source, n);
        let cfg = SimConfig::new(n, flat_rates(0.0, 1.0), 0, 3).unwrap();
        // Identical half-and-half sequences are jointly typical under the
        // correlated pair law; singleton bins make them unique.
        let y = vec![0u8, 1, 0, 1];
        let rank = rank_sequence(&y, 2) as usize;
        let out = decode((0, rank, 0, rank), &code, &cfg);
        assert!(!out.failed);
        assert_eq!(out.indices, Some((0, rank, 0, rank)));
        assert_eq!(out.xhat_seq, y);
    }

    #[test]
    fn decode_fails_on_ambiguity() {
        // Two identical codewords in the same bin: both typical, no unique
        // answer.
        let source = SourceSpec::binary_symmetric(0.05, 0.3);
        let aux = binary_identity_aux();
        let joint = chain_join(&source, &aux).unwrap();
        let n = 4;
        let y = vec![0u8, 1, 0, 1];
        let planted = AgentCode {
            v_codebook: vec![vec![0u8; n]],
            u_codebooks: vec![vec![y.clone(), y.clone()]],
            v_binning: Binning { count: 1, bins: 1 },
            u_binning: Binning { count: 2, bins: 1 },
        };
        let single = AgentCode {
            v_codebook: vec![vec![0u8; n]],
            u_codebooks: vec![vec![y.clone()]],
            v_binning: Binning { count: 1, bins: 1 },
            u_binning: Binning { count: 1, bins: 1 },
        };
        let code = CodeInstance::assemble(n, joint, aux.xhat.clone(), planted, single).unwrap();
        let cfg = SimConfig::new(n, flat_rates(0.0, 0.25), 0, 3).unwrap();
        let out = decode((0, 0, 0, 0), &code, &cfg);
        assert!(out.failed);
        assert_eq!(out.xhat_seq, vec![0u8; n]);
    }

    #[test]
    fn noiseless_identity_pipeline_has_zero_distortion() {
        let source = SourceSpec::binary_symmetric(0.0, 0.0);
        let n = 3;
        let code = identity_code(&source, n);
        let mut cfg = SimConfig::new(n, flat_rates(0.0, 1.0), 200, 5).unwrap();
        // Under noiseless channels every off-diagonal cell has zero
        // probability, so exact copies are the only typical picks at any
        // slack wide enough to ignore the block's own composition.
        cfg.delta = 1.0;
        let summary = run_trials_with_code(&source, &code, &cfg).unwrap();
        assert_eq!(summary.mean_distortion, Some(0.0));
        assert_eq!(summary.decode_failure_rate, Some(0.0));
    }

    #[test]
    fn constant_encoders_hit_the_constant_reconstruction_cost() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = AuxConfig::degenerate(&source);
        let cfg = SimConfig::new(6, flat_rates(0.0, 0.0), 4000, 9).unwrap();
        let summary = run_trials(&source, &aux, &cfg).unwrap();
        // The constant reconstruction letter costs 0.5 on the uniform
        // binary source; allow three Monte-Carlo sigmas.
        let mean = summary.mean_distortion.unwrap();
        let se = summary.std_error.unwrap();
        assert!((mean - 0.5).abs() <= 3.0 * se.max(1e-3), "mean {mean}");
        assert_eq!(summary.decode_failure_rate, Some(0.0));
    }

    #[test]
    fn reencoding_recorded_observations_reproduces_messages() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = binary_identity_aux();
        let mut cfg = SimConfig::new(6, flat_rates(0.0, 1.0), 50, 21).unwrap();
        cfg.eps = [0.0, 0.0, 0.2, 0.0];
        let code = gen_code(&source, &aux, &cfg).unwrap();
        let summary = run_trials_with_code(&source, &code, &cfg).unwrap();
        for rec in &summary.records {
            let e1 = encode(&rec.y1, 0, &code, &cfg);
            let e2 = encode(&rec.y2, 1, &code, &cfg);
            assert_eq!((e1.b, e1.w, e2.b, e2.w), rec.msgs);
        }
        // The summary mean is exactly the arithmetic mean of the records.
        let mean: f64 = summary.records.iter().map(|r| r.distortion).sum::<f64>()
            / summary.records.len() as f64;
        assert_eq!(summary.mean_distortion, Some(mean));
    }

    #[test]
    fn dry_run_reports_nothing() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = binary_identity_aux();
        let cfg = SimConfig::new(4, flat_rates(0.0, 0.5), 0, 1).unwrap();
        let summary = run_trials(&source, &aux, &cfg).unwrap();
        assert_eq!(summary.trials, 0);
        assert!(summary.mean_distortion.is_none());
    }

    #[test]
    fn constant_encoder_equivocation_is_the_blind_entropy() {
        // A silent link leaves exactly H(X|E) per symbol.
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = AuxConfig::degenerate(&source);
        for n in [1, 3, 5] {
            let cfg = SimConfig::new(n, flat_rates(0.0, 0.0), 0, 2).unwrap();
            let code = gen_code(&source, &aux, &cfg).unwrap();
            let eq = exact_equivocation(&source, &code, 0, &cfg).unwrap();
            let h_x_e = code.joint.entropy(&[Var::X], &[Var::E]).unwrap();
            assert!((eq - h_x_e).abs() < 1e-12, "n={n}: {eq} vs {h_x_e}");
        }
    }

    #[test]
    fn transparent_eve_leaves_zero_equivocation() {
        // E = X: the eavesdropper already knows the source.
        let source = SourceSpec::binary_symmetric(0.1, 0.0);
        let aux = binary_identity_aux();
        let cfg = SimConfig::new(3, flat_rates(0.0, 1.0), 0, 2).unwrap();
        let code = gen_code(&source, &aux, &cfg).unwrap();
        let eq = exact_equivocation(&source, &code, 0, &cfg).unwrap();
        assert!(eq.abs() < 1e-12, "{eq}");
    }

    #[test]
    fn identity_encoder_matches_the_single_letter_entropy() {
        // Blocklength 1, encoder revealing Y1: enumeration must agree with
        // the direct H(X|Y1,E) computation.
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let code = identity_code(&source, 1);
        let mut cfg = SimConfig::new(1, flat_rates(0.0, 1.0), 0, 2).unwrap();
        cfg.delta = 0.6;
        let eq = exact_equivocation(&source, &code, 0, &cfg).unwrap();
        let want = code.joint.entropy(&[Var::X], &[Var::Y1, Var::E]).unwrap();
        assert!((eq - want).abs() < 1e-12, "{eq} vs {want}");
    }

    #[test]
    fn equivocation_respects_information_limits() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = binary_identity_aux();
        let cfg = SimConfig::new(4, flat_rates(0.0, 0.75), 0, 13).unwrap();
        let code = gen_code(&source, &aux, &cfg).unwrap();
        let eq = exact_equivocation(&source, &code, 0, &cfg).unwrap();
        let h_x = code.joint.entropy(&[Var::X], &[]).unwrap();
        let h_x_e = code.joint.entropy(&[Var::X], &[Var::E]).unwrap();
        let link_rate = (code.message_count(0) as f64).log2() / cfg.n as f64;
        assert!(eq >= 0.0);
        assert!(eq <= h_x + 1e-9);
        // Observing at most `link_rate` bits/symbol can reduce the blind
        // uncertainty by at most that much.
        assert!(eq >= h_x_e - link_rate - 1e-9);
    }

    #[test]
    fn coarse_leak_with_independent_side_information() {
        // E independent of everything: H(E^n|s) = n·H(E) exactly.
        let source = SourceSpec::new(
            Pmf::uniform(2),
            CondPmf::bsc(0.1),
            CondPmf::bsc(0.1),
            CondPmf::bsc(0.5),
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            1.0,
        )
        .unwrap();
        let aux = AuxConfig::new(
            CondPmf::identity(2),
            CondPmf::identity(2),
            CondPmf::bsc(0.2),
            CondPmf::bsc(0.2),
            XhatMap::new(vec![0, 0, 1, 1], 2, 2),
        )
        .unwrap();
        let mut cfg = SimConfig::new(4, flat_rates(0.25, 0.75), 0, 5).unwrap();
        cfg.eps = [0.2, 0.0, 0.2, 0.0];
        let code = gen_code(&source, &aux, &cfg).unwrap();
        let report = coarse_leak_check(&source, &code, &cfg, 0.1).unwrap();
        assert!((report.h_en_given_s - 4.0).abs() < 1e-12);
        assert!(report.holds);
    }

    #[test]
    fn coarse_leak_degenerate_single_codeword() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = AuxConfig::degenerate(&source);
        let cfg = SimConfig::new(4, flat_rates(0.0, 0.0), 0, 5).unwrap();
        let code = gen_code(&source, &aux, &cfg).unwrap();
        let report = coarse_leak_check(&source, &code, &cfg, 0.0).unwrap();
        // A constant coarse index leaks nothing: H(E^n|s) = n·H(E), and
        // H(E|V) = H(E) for the single-letter V.
        let h_e = code.joint.entropy(&[Var::E], &[]).unwrap();
        assert!((report.h_en_given_s - 4.0 * h_e).abs() < 1e-12);
        assert!((report.h_e_given_v - h_e).abs() < 1e-15);
        assert!(report.holds);
    }

    #[test]
    fn correlated_coarse_layer_reports_finite_slack() {
        let source = SourceSpec::binary_symmetric(0.1, 0.2);
        let aux = AuxConfig::new(
            CondPmf::identity(2),
            CondPmf::identity(2),
            CondPmf::bsc(0.1),
            CondPmf::bsc(0.1),
            XhatMap::new(vec![0, 0, 1, 1], 2, 2),
        )
        .unwrap();
        let mut cfg = SimConfig::new(4, flat_rates(0.4, 0.6), 0, 6).unwrap();
        cfg.eps = [0.25, 0.0, 0.25, 0.0];
        let code = gen_code(&source, &aux, &cfg).unwrap();
        let report = coarse_leak_check(&source, &code, &cfg, 0.1).unwrap();
        assert!(report.h_en_given_s > 0.0);
        assert!(report.slack.is_finite());
    }

    #[test]
    fn enumeration_cap_blocks_large_blocklengths() {
        let source = SourceSpec::binary_symmetric(0.1, 0.3);
        let aux = binary_identity_aux();
        let cfg = SimConfig::new(20, flat_rates(0.0, 1.0), 0, 2).unwrap();
        match gen_code(&source, &aux, &cfg) {
            Err(Error::EnumerationCap { .. }) => {}
            Ok(code) => {
                let err = exact_equivocation(&source, &code, 0, &cfg).unwrap_err();
                assert!(matches!(err, Error::EnumerationCap { .. }), "{err}");
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
