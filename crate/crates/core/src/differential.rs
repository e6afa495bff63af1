//! Differential analysis of toy SPNs with respect to XOR or to a parallel
//! circle operation: difference tables, trail search, a sampling
//! distinguisher, last-round key recovery and the trapdoor search pipeline.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::algebra::{parallel_extend, AlgebraSpec, ClassTwoAlgebra, PackedAlgebra};
use crate::automorphism::{dsum_aut_membership, is_automorphism, sample_dsum_aut};
use crate::error::{Error, Result};
use crate::gf2::{BitMat, BitVec};
use crate::spn::{CipherSpec, SBox};

/// Trail search refuses beyond this block size.
pub const TRAIL_GUARD: usize = 24;
/// Markov propagation refuses beyond this block size.
pub const MARKOV_GUARD: usize = 16;
const SAMPLE_CHUNK: usize = 1024;
const EPS: f64 = 1e-9;

/// The difference operation: XOR, or the brick-wise circle of an algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiffOp {
    Xor,
    Circle(AlgebraSpec),
}

impl DiffOp {
    pub fn name(&self) -> &'static str {
        match self {
            DiffOp::Xor => "xor",
            DiffOp::Circle(_) => "circle",
        }
    }
}

/// A difference operation compiled for `h` bricks of `n` bits on `u64` states.
#[derive(Clone, Debug)]
pub struct BlockOp {
    h: usize,
    n: usize,
    brick: Option<PackedAlgebra>,
}

impl BlockOp {
    pub fn new(op: &DiffOp, h: usize, n: usize) -> Result<Self> {
        let brick = match op {
            DiffOp::Xor => None,
            DiffOp::Circle(spec) => {
                if spec.n() != n {
                    return Err(Error::Dimension(format!(
                        "algebra has dimension {}, bricks have width {n}",
                        spec.n()
                    )));
                }
                Some(PackedAlgebra::new(spec)?)
            }
        };
        Ok(Self { h, n, brick })
    }

    fn mask(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    /// `x ⊛ y` on one brick.
    #[inline]
    pub fn brick_op(&self, x: u64, y: u64) -> u64 {
        match &self.brick {
            None => x ^ y,
            Some(p) => p.circle(x, y),
        }
    }

    /// `x ⊛ y` on the whole block.
    #[inline]
    pub fn combine(&self, x: u64, y: u64) -> u64 {
        match &self.brick {
            None => x ^ y,
            Some(p) => (0..self.h).fold(0, |acc, j| {
                let s = (self.h - 1 - j) * self.n;
                acc | (p.circle((x >> s) & self.mask(), (y >> s) & self.mask()) << s)
            }),
        }
    }

    /// Rank of `k ↦ k·δ` on one brick; zero for XOR.
    pub fn brick_key_rank(&self, delta: u64) -> usize {
        match &self.brick {
            None => 0,
            Some(p) => {
                let rows: Vec<BitVec> = (0..self.n)
                    .map(|i| BitVec::from_u64(p.dot(1 << (self.n - 1 - i), delta), self.n))
                    .collect();
                BitMat::from_rows(rows).expect("square").rank()
            }
        }
    }

    /// Basis of the image of `k ↦ k·δ` on one brick, as packed values.
    fn brick_key_image(&self, delta: u64) -> Vec<u64> {
        match &self.brick {
            None => Vec::new(),
            Some(p) => {
                let prods: Vec<BitVec> = (0..self.n)
                    .map(|i| BitVec::from_u64(p.dot(1 << (self.n - 1 - i), delta), self.n))
                    .collect();
                crate::gf2::reduce_basis(prods).iter().map(BitVec::to_u64).collect()
            }
        }
    }
}

/// Difference distribution table: `counts[a][b] = #{x : S(x) ⊛ S(x ⊛ a) = b}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ddt {
    pub op: DiffOp,
    pub n: usize,
    counts: Vec<u32>,
}

/// A largest nontrivial table entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bias {
    pub input: u32,
    pub output: u32,
    pub count: u32,
}

impl Ddt {
    pub fn get(&self, input: u32, output: u32) -> u32 {
        self.counts[((input as usize) << self.n) | output as usize]
    }

    pub fn size(&self) -> usize {
        1 << self.n
    }

    pub fn row(&self, input: u32) -> &[u32] {
        let s = self.size();
        &self.counts[input as usize * s..(input as usize + 1) * s]
    }

    /// Maximal count over nonzero inputs; ties go to the least `(input, output)`.
    pub fn max_bias(&self) -> Bias {
        let mut best = Bias {
            input: 0,
            output: 0,
            count: 0,
        };
        for a in 1..self.size() as u32 {
            for (b, &c) in self.row(a).iter().enumerate() {
                if c > best.count {
                    best = Bias {
                        input: a,
                        output: b as u32,
                        count: c,
                    };
                }
            }
        }
        best
    }
}

impl fmt::Display for Ddt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.size().to_string().len();
        for a in 0..self.size() as u32 {
            let cells: Vec<String> = self.row(a).iter().map(|c| format!("{c:>width$}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        let b = self.max_bias();
        write!(
            f,
            "max-bias: {:0w$b} -> {:0w$b} count {}/{}",
            b.input,
            b.output,
            b.count,
            self.size(),
            w = self.n
        )
    }
}

pub fn ddt(sbox: &SBox, op: &DiffOp) -> Result<Ddt> {
    let n = sbox.n();
    let bop = BlockOp::new(op, 1, n)?;
    let size = 1usize << n;
    let counts = (0..size as u64)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut row = vec![0u32; size];
            for x in 0..size as u64 {
                let y = bop.brick_op(
                    u64::from(sbox.apply(x as u32)),
                    u64::from(sbox.apply(bop.brick_op(x, a) as u32)),
                );
                row[y as usize] += 1;
            }
            row
        })
        .collect();
    Ok(Ddt {
        op: op.clone(),
        n,
        counts,
    })
}

/// Probability over uniform `k` that `k·Δ = 0`, i.e. `2^{-rank(k ↦ k·Δ)}`.
pub fn key_addition_factor<A: ClassTwoAlgebra>(alg: &A, delta: &BitVec) -> f64 {
    let n = alg.dim();
    let rows: Vec<BitVec> = (0..n).map(|i| alg.product(&BitVec::unit(n, i), delta)).collect();
    let rank = BitMat::from_rows(rows).expect("square").rank();
    0.5f64.powi(rank as i32)
}

/// One round of a trail: input difference, s-box output difference and the
/// difference after `μ` and key addition.
#[derive(Clone, Debug, PartialEq)]
pub struct TrailRound {
    pub input: u64,
    pub sbox_output: u64,
    pub output: u64,
    pub sbox_probability: f64,
    pub key_factor: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trail {
    pub op: &'static str,
    pub block_len: usize,
    pub rounds: Vec<TrailRound>,
    pub probability: f64,
}

impl Trail {
    pub fn input(&self) -> u64 {
        self.rounds.first().map_or(0, |r| r.input)
    }

    pub fn output(&self) -> u64 {
        self.rounds.last().map_or(0, |r| r.output)
    }

    pub fn weight(&self) -> f64 {
        -self.probability.log2()
    }
}

impl fmt::Display for Trail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.block_len;
        for (i, r) in self.rounds.iter().enumerate() {
            writeln!(
                f,
                "round {}: {:0w$b} -> {:0w$b} -> {:0w$b}  p_sbox = {} key = {}",
                i + 1,
                r.input,
                r.sbox_output,
                r.output,
                r.sbox_probability,
                r.key_factor
            )?;
        }
        write!(f, "probability: {} (2^-{:.4})", self.probability, self.weight())
    }
}

/// Everything the round model needs, on packed states.
struct TrailModel {
    h: usize,
    n: usize,
    mu: crate::spn::PackedLinear,
    mu_inv: crate::spn::PackedLinear,
    /// Per brick input: `(output, count)` sorted by count descending, then output.
    transitions: Vec<Vec<(u64, u32)>>,
    key_rank: Vec<usize>,
}

impl TrailModel {
    fn new(cipher: &CipherSpec, op: &DiffOp) -> Result<Self> {
        let big_n = cipher.block_len();
        if big_n > TRAIL_GUARD {
            return Err(Error::SizeGuard(format!(
                "trail search limited to N <= {TRAIL_GUARD}, got N = {big_n}"
            )));
        }
        if let DiffOp::Circle(spec) = op {
            let par = parallel_extend(spec, cipher.h())?;
            if spec.n() != cipher.n() {
                return Err(Error::Dimension(format!(
                    "algebra has dimension {}, bricks have width {}",
                    spec.n(),
                    cipher.n()
                )));
            }
            if !is_automorphism(&par, cipher.mu()) {
                return Err(Error::NonDeterministicLinearLayer);
            }
        }
        let table = ddt(cipher.sbox(), op)?;
        let bop = BlockOp::new(op, cipher.h(), cipher.n())?;
        let transitions = (0..table.size() as u32)
            .map(|a| {
                let mut t: Vec<(u64, u32)> = table
                    .row(a)
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(b, &c)| (b as u64, c))
                    .collect();
                t.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
                t
            })
            .collect();
        let key_rank = (0..table.size() as u64).map(|d| bop.brick_key_rank(d)).collect();
        Ok(Self {
            h: cipher.h(),
            n: cipher.n(),
            mu: crate::spn::PackedLinear::new(cipher.mu()),
            mu_inv: crate::spn::PackedLinear::new(cipher.mu_inv()),
            transitions,
            key_rank,
        })
    }

    fn brick(&self, x: u64, j: usize) -> u64 {
        (x >> ((self.h - 1 - j) * self.n)) & ((1 << self.n) - 1)
    }

    fn block_key_rank(&self, delta: u64) -> usize {
        (0..self.h).map(|j| self.key_rank[self.brick(delta, j) as usize]).sum()
    }

    fn round_record(&self, input: u64, sbox_output: u64) -> TrailRound {
        let size = (1u64 << self.n) as f64;
        let sbox_probability = (0..self.h)
            .map(|j| {
                let a = self.brick(input, j);
                let b = self.brick(sbox_output, j);
                let c = self.transitions[a as usize]
                    .iter()
                    .find(|t| t.0 == b)
                    .map_or(0, |t| t.1);
                f64::from(c) / size
            })
            .product();
        let output = self.mu.apply(sbox_output);
        TrailRound {
            input,
            sbox_output,
            output,
            sbox_probability,
            key_factor: 0.5f64.powi(self.block_key_rank(output) as i32),
        }
    }
}

struct Search<'a> {
    model: &'a TrailModel,
    rounds: usize,
    bounds: &'a [f64],
    best_weight: f64,
    best_seq: Vec<u64>,
}

impl Search<'_> {
    fn better(&self, w: f64, seq: &[u64]) -> bool {
        w < self.best_weight - EPS || ((w - self.best_weight).abs() <= EPS && seq < self.best_seq.as_slice())
    }

    fn run_round(&mut self, seq: &mut Vec<u64>, weight: f64) {
        let done = seq.len() - 1;
        if done == self.rounds {
            if self.better(weight, seq) {
                self.best_weight = weight;
                self.best_seq = seq.clone();
            }
            return;
        }
        let input = *seq.last().expect("nonempty");
        self.run_brick(seq, input, 0, 0, weight);
    }

    fn run_brick(&mut self, seq: &mut Vec<u64>, input: u64, j: usize, out: u64, weight: f64) {
        let m = self.model;
        let remaining = self.rounds - (seq.len() - 1) - 1;
        if weight + self.bounds[remaining] > self.best_weight + EPS {
            return;
        }
        if j == m.h {
            let next = m.mu.apply(out);
            let w = weight + m.block_key_rank(next) as f64;
            if w + self.bounds[remaining] > self.best_weight + EPS {
                return;
            }
            seq.push(next);
            self.run_round(seq, w);
            seq.pop();
            return;
        }
        let a = m.brick(input, j) as usize;
        let shift = (m.h - 1 - j) * m.n;
        for &(b, c) in &m.transitions[a] {
            let w = weight + m.n as f64 - f64::from(c).log2();
            if w + self.bounds[remaining] > self.best_weight + EPS {
                break;
            }
            self.run_brick(seq, input, j + 1, out | (b << shift), w);
        }
    }
}

/// Best `r`-round trail under round independence. Transitions through `μ`
/// are deterministic; for the circle operation each key addition costs
/// `2^{-rank(k ↦ k·Δ)}`. Among equal probabilities the lexicographically
/// least difference sequence wins.
pub fn trail_search(cipher: &CipherSpec, op: &DiffOp, rounds: usize) -> Result<Trail> {
    if rounds == 0 {
        return Err(Error::Dimension("trail search needs at least one round".into()));
    }
    let model = TrailModel::new(cipher, op)?;
    let big_n = cipher.block_len();
    let mut bounds = vec![0.0f64];
    let mut best_seq = Vec::new();
    for k in 1..=rounds {
        let mut search = Search {
            model: &model,
            rounds: k,
            bounds: &bounds,
            best_weight: f64::INFINITY,
            best_seq: Vec::new(),
        };
        for start in 1..(1u64 << big_n) {
            let mut seq = vec![start];
            search.run_round(&mut seq, 0.0);
        }
        let weight = search.best_weight;
        best_seq = search.best_seq;
        bounds.push(weight);
    }
    let records: Vec<TrailRound> = best_seq
        .windows(2)
        .map(|w| model.round_record(w[0], model.mu_inv.apply(w[1])))
        .collect();
    let probability = records.iter().map(|r| r.sbox_probability * r.key_factor).product();
    Ok(Trail {
        op: op.name(),
        block_len: big_n,
        rounds: records,
        probability,
    })
}

/// Distribution of the difference after `rounds` rounds under the Markov
/// assumption: every round sees a uniform state and an independent uniform
/// key. For the circle operation a key addition moves `Δ` uniformly inside
/// `Δ + {k·Δ}`. XOR ciphers satisfy the assumption; circle differences
/// through XOR key addition only approximately.
pub fn markov_distribution(cipher: &CipherSpec, op: &DiffOp, input: u64, rounds: usize) -> Result<Vec<f64>> {
    let big_n = cipher.block_len();
    if big_n > MARKOV_GUARD {
        return Err(Error::SizeGuard(format!(
            "Markov propagation limited to N <= {MARKOV_GUARD}, got N = {big_n}"
        )));
    }
    let model = TrailModel::new(cipher, op)?;
    let bop = BlockOp::new(op, cipher.h(), cipher.n())?;
    let (h, n) = (cipher.h(), cipher.n());
    let size = 1usize << big_n;
    let brick_size = (1u64 << n) as f64;
    let mut dist = vec![0.0f64; size];
    dist[input as usize] = 1.0;
    for _ in 0..rounds {
        let mut next = vec![0.0f64; size];
        for (delta, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            // s-box layer: brick-wise product of table rows
            let mut layer: Vec<(u64, f64)> = vec![(0, p)];
            for j in 0..h {
                let a = model.brick(delta as u64, j) as usize;
                let shift = (h - 1 - j) * n;
                layer = layer
                    .iter()
                    .flat_map(|&(acc, q)| {
                        model.transitions[a]
                            .iter()
                            .map(move |&(b, c)| (acc | (b << shift), q * f64::from(c) / brick_size))
                    })
                    .collect();
            }
            for (out, q) in layer {
                let after_mu = model.mu.apply(out);
                let image: Vec<u64> = (0..h)
                    .flat_map(|j| {
                        let shift = (h - 1 - j) * n;
                        bop.brick_key_image(model.brick(after_mu, j))
                            .into_iter()
                            .map(move |v| v << shift)
                    })
                    .collect();
                let shifts = crate::gf2::span_elements(
                    &image.iter().map(|&v| BitVec::from_u64(v, big_n)).collect::<Vec<_>>(),
                    big_n,
                );
                let share = q / shifts.len() as f64;
                for s in shifts {
                    next[(after_mu ^ s.to_u64()) as usize] += share;
                }
            }
        }
        dist = next;
    }
    Ok(dist)
}

/// `P[Δ_in → Δ_out]` over `rounds` rounds under the Markov assumption.
pub fn differential_probability(
    cipher: &CipherSpec,
    op: &DiffOp,
    input: u64,
    output: u64,
    rounds: usize,
) -> Result<f64> {
    Ok(markov_distribution(cipher, op, input, rounds)?[output as usize])
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistinguisherResult {
    pub samples: u64,
    pub hits: u64,
    pub probability: f64,
    pub seed: u64,
}

impl DistinguisherResult {
    /// Binomial standard deviation of the observed frequency at probability `p`.
    pub fn sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Fraction of random `(x, round keys)` with `E(x) ⊛ E(x ⊛ Δ_in) = Δ_out`.
/// Fresh keys are drawn for every sample. Samples are split into fixed
/// chunks, each with its own stream of the seeded generator, so the result
/// does not depend on the number of worker threads.
pub fn distinguisher(
    cipher: &CipherSpec,
    op: &DiffOp,
    input: u64,
    output: u64,
    samples: u64,
    seed: u64,
) -> Result<DistinguisherResult> {
    let packed = cipher.packed()?;
    let bop = BlockOp::new(op, cipher.h(), cipher.n())?;
    let mask = mask(cipher.block_len());
    let rounds = cipher.rounds();
    let chunks = (samples as usize).div_ceil(SAMPLE_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let todo = (samples as usize - c * SAMPLE_CHUNK).min(SAMPLE_CHUNK);
            let mut keys = vec![0u64; rounds];
            let mut hits = 0u64;
            for _ in 0..todo {
                let x = rng.random::<u64>() & mask;
                for k in keys.iter_mut() {
                    *k = rng.random::<u64>() & mask;
                }
                let y = packed.encrypt_with(x, &keys);
                let y2 = packed.encrypt_with(bop.combine(x, input), &keys);
                if bop.combine(y, y2) == output {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(DistinguisherResult {
        samples,
        hits,
        probability: if samples == 0 {
            0.0
        } else {
            hits as f64 / samples as f64
        },
        seed,
    })
}

fn mask(bits: usize) -> u64 {
    if bits == 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackResult {
    pub target_brick: usize,
    /// `(candidate, counter)`, best first; ties by candidate value.
    pub ranking: Vec<(u32, u64)>,
    pub pairs: u64,
    pub seed: u64,
    /// The brick of `k_r·μ⁻¹` actually used by the cipher, for evaluation.
    pub correct_key: u32,
}

impl AttackResult {
    pub fn rank_of(&self, candidate: u32) -> usize {
        self.ranking
            .iter()
            .position(|&(c, _)| c == candidate)
            .expect("ranking is complete")
            + 1
    }

    pub fn correct_rank(&self) -> usize {
        self.rank_of(self.correct_key)
    }
}

/// Last-round key recovery with an `(r−1)`-round trail.
pub fn last_round_key_recovery(
    cipher: &CipherSpec,
    op: &DiffOp,
    trail: &Trail,
    pairs: u64,
    seed: u64,
) -> Result<AttackResult> {
    let rounds = cipher.rounds();
    if rounds == 0 || trail.rounds.len() + 1 != rounds {
        return Err(Error::Dimension(format!(
            "trail covers {} rounds, cipher has {rounds}; need r - 1",
            trail.rounds.len()
        )));
    }
    recover_last_round_key(cipher, op, trail.input(), trail.output(), pairs, seed)
}

/// Encrypts pairs with input difference `input` and partially decrypts the
/// last round on the first active brick of `target`, for every guess of
/// that brick of `k_r·μ⁻¹`. A guess scores when the recovered brick
/// difference equals the one in `target`.
pub fn recover_last_round_key(
    cipher: &CipherSpec,
    op: &DiffOp,
    input: u64,
    target: u64,
    pairs: u64,
    seed: u64,
) -> Result<AttackResult> {
    let rounds = cipher.rounds();
    if rounds == 0 {
        return Err(Error::Dimension("key recovery needs at least one round".into()));
    }
    let n = cipher.n();
    let min = 1u64 << n;
    if pairs < min {
        return Err(Error::InsufficientPairs {
            got: pairs as usize,
            min: min as usize,
        });
    }
    let packed = cipher.packed()?;
    let bop = BlockOp::new(op, cipher.h(), n)?;
    let brick = (0..cipher.h())
        .find(|&j| packed.brick(target, j) != 0)
        .ok_or_else(|| Error::Dimension("trail output difference is zero".into()))?;
    let want = u64::from(packed.brick(target, brick));
    let last_key = packed.keys()[rounds - 1];
    let correct_key = packed.brick(packed.mu_inv(last_key), brick);
    let mask = mask(cipher.block_len());
    let candidates = 1usize << n;
    let chunks = (pairs as usize).div_ceil(SAMPLE_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let todo = (pairs as usize - c * SAMPLE_CHUNK).min(SAMPLE_CHUNK);
            let mut counts = vec![0u64; candidates];
            for _ in 0..todo {
                let x = rng.random::<u64>() & mask;
                let c1 = packed.brick(packed.mu_inv(packed.encrypt(x)), brick);
                let c2 = packed.brick(packed.mu_inv(packed.encrypt(bop.combine(x, input))), brick);
                for (g, slot) in counts.iter_mut().enumerate() {
                    let u1 = u64::from(packed.sbox().invert(c1 ^ g as u32));
                    let u2 = u64::from(packed.sbox().invert(c2 ^ g as u32));
                    if bop.brick_op(u1, u2) == want {
                        *slot += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; candidates],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut ranking: Vec<(u32, u64)> = counts.into_iter().enumerate().map(|(g, c)| (g as u32, c)).collect();
    ranking.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(AttackResult {
        target_brick: brick,
        ranking,
        pairs,
        seed,
        correct_key,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrapdoorParams {
    pub m: usize,
    pub d: usize,
    pub h: usize,
    /// Number of sampled `μ` candidates.
    pub mu_candidates: usize,
    /// Number of sampled algebras when exhaustive enumeration is too large.
    pub algebra_samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrapdoorResult {
    pub algebra: AlgebraSpec,
    pub mu: BitMat,
    pub pi: Vec<usize>,
    pub xor_bias: Bias,
    pub circle_bias: Bias,
    pub improved: bool,
    pub algebras_scored: usize,
    pub mu_candidates: usize,
    /// Minimum number of active output bricks over single-active-brick inputs.
    pub diffusion: usize,
    pub seed: u64,
}

/// Candidate brick algebras with `dim R² = 1`: `B_k = b_k·B` for full-rank
/// skew-symmetric `B` and nonzero `b`. Exhaustive for `m ≤ 4`, sampled beyond.
pub fn unidim_algebras<R: Rng + ?Sized>(m: usize, d: usize, samples: usize, rng: &mut R) -> Result<Vec<AlgebraSpec>> {
    if m == 0 || m % 2 == 1 || d == 0 || d > 16 {
        return Err(Error::Dimension(format!(
            "uni-dimensional algebras need even m > 0 and 0 < d <= 16, got m = {m}, d = {d}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j))).collect();
    let from_code = |code: u64| {
        let mut b = BitMat::zeros(m, m);
        for (t, &(i, j)) in pairs.iter().enumerate() {
            if (code >> t) & 1 == 1 {
                b.set(i, j, true);
                b.set(j, i, true);
            }
        }
        b
    };
    let forms: Vec<BitMat> = if m <= 4 {
        (0..1u64 << pairs.len())
            .map(from_code)
            .filter(|b| b.rank() == m)
            .collect()
    } else {
        let mut out = Vec::with_capacity(samples);
        while out.len() < samples {
            let b = from_code(rng.random::<u64>() & mask(pairs.len()));
            if b.rank() == m {
                out.push(b);
            }
        }
        out
    };
    let mut specs = Vec::new();
    for b in &forms {
        for code in 1..1u64 << d {
            let bits = BitVec::from_u64(code, d);
            let defining = bits
                .bits()
                .map(|on| if on { b.clone() } else { BitMat::zeros(m, m) })
                .collect();
            specs.push(AlgebraSpec::new(m, d, defining)?);
        }
    }
    Ok(specs)
}

/// Minimum number of active output bricks of `δμ` over inputs with a single
/// active brick.
pub fn diffusion_score(mu: &BitMat, h: usize, n: usize) -> usize {
    let lin = crate::spn::PackedLinear::new(mu);
    let mut best = usize::MAX;
    for j in 0..h {
        for v in 1..1u64 << n {
            let out = lin.apply(v << ((h - 1 - j) * n));
            let active = (0..h)
                .filter(|&t| (out >> ((h - 1 - t) * n)) & ((1 << n) - 1) != 0)
                .count();
            best = best.min(active);
        }
    }
    best
}

/// Search for a trapdoor: the brick algebra maximising the circle-table
/// bias of the s-box, then the best-diffusing of several sampled
/// automorphisms of the `h`-fold parallel extension.
pub fn trapdoor_pipeline(sbox: &SBox, params: &TrapdoorParams) -> Result<TrapdoorResult> {
    let (m, d, h) = (params.m, params.d, params.h);
    if sbox.n() != m + d {
        return Err(Error::Dimension(format!(
            "s-box width {} differs from m + d = {}",
            sbox.n(),
            m + d
        )));
    }
    if h == 0 || h * sbox.n() > 64 {
        return Err(Error::Dimension(format!("brick count h = {h} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let algebras = unidim_algebras(m, d, params.algebra_samples, &mut rng)?;
    let xor_bias = ddt(sbox, &DiffOp::Xor)?.max_bias();
    let scored: Vec<Bias> = algebras
        .par_iter()
        .map(|a| ddt(sbox, &DiffOp::Circle(a.clone())).map(|t| t.max_bias()))
        .collect::<Result<_>>()?;
    let (best_idx, circle_bias) =
        scored.iter().enumerate().fold(
            (0, scored[0]),
            |acc, (i, b)| if b.count > acc.1.count { (i, *b) } else { acc },
        );
    let algebra = algebras[best_idx].clone();
    let par = parallel_extend(&algebra, h)?;
    let mut best: Option<(usize, BitMat, Vec<usize>)> = None;
    for _ in 0..params.mu_candidates.max(1) {
        let aut = sample_dsum_aut(&par, &mut rng)?;
        let g = aut.matrix();
        debug_assert!(dsum_aut_membership(&par, &g)?.member);
        let score = diffusion_score(&g, h, sbox.n());
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, g, aut.pi));
        }
    }
    let (diffusion, mu, pi) = best.expect("at least one candidate");
    Ok(TrapdoorResult {
        improved: circle_bias.count > xor_bias.count,
        algebra,
        mu,
        pi,
        xor_bias,
        circle_bias,
        algebras_scored: algebras.len(),
        mu_candidates: params.mu_candidates.max(1),
        diffusion,
        seed: params.seed,
    })
}
