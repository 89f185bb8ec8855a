//! The list-approximation algorithms and their exact evaluation.
//!
//! A [`Chain`] holds, for every level `ℓ = e+2 … n+e+1`, the augmented set
//! `B_{n,ℓ}` and a rich-owner graph built with `c = 2`. A list for `x` has one
//! graph-index program per level: the program names the level and the right
//! node reached from `x` along the edge selected by a prefix of one shared
//! seed. Evaluating a program returns the first member of `B_{n,ℓ}` adjacent
//! to that right node, so an entry computes `x` exactly when `x` is the first
//! of its set on that node.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::bigraph::{LeftNode, RightId};
use crate::bits::Bits;
use crate::machine::{
    encode_graph_program, enumerate_b, BSet, BVariant, ComplexityTable, GraphIndexResolver, GraphKey, MachineError,
    ToyMachine, Upper,
};
use crate::ratio::Rational;
use crate::richowner::{build_rich_owner, canonical_int, BuildOptions, ExtractorSource, RichOwnerError, RichOwnerGraph};

/// Largest seed length the exact profile will enumerate.
pub const MAX_PROFILE_SEED_BITS: u32 = 24;

/// `c` of the augmented chain.
pub const CHAIN_C: u32 = 2;

#[derive(Debug, Error)]
pub enum ListError {
    #[error("level {ell}: {what} is {count}, allowed {allowed}")]
    Audit { ell: u32, what: &'static str, count: u64, allowed: u64 },
    #[error("{r} seed bits exceed the enumeration cap {MAX_PROFILE_SEED_BITS}")]
    SeedCap { r: u32 },
    #[error("invalid input: {0}")]
    Parameter(String),
    #[error("call took {took:?}, over the budget {budget:?}")]
    TimeBudget { took: Duration, budget: Duration },
    #[error("level {ell}: {source}")]
    Level { ell: u32, source: Box<ListError> },
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    RichOwner(#[from] RichOwnerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Counts recorded when a level is built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelAudit {
    pub ell: u32,
    pub size: u64,
    pub first_type: u64,
    pub second_type: u64,
    /// Members of the set that are not `δ`-rich in it.
    pub non_rich: u64,
    /// `2^(ℓ − c)`: the rich owner allowance.
    pub allowed: u64,
    /// `2^k` with the builder's (clamped) extractor entropy `k`.
    pub extractor_allowance: u64,
}

impl LevelAudit {
    pub fn size_ok(&self, plain: bool) -> bool {
        let cap = 1u128 << self.ell;
        if plain {
            (self.size as u128) < cap
        } else {
            self.size as u128 <= cap
        }
    }

    pub fn rich_owner_ok(&self) -> bool {
        self.non_rich <= self.allowed
    }

    /// At least `|B| − 2^k` members are `4ε`-rich.
    pub fn extractor_ok(&self) -> bool {
        self.non_rich <= self.extractor_allowance
    }
}

/// One level: the set, its graph and the indexes used to answer programs.
pub struct Level {
    pub key: GraphKey,
    pub set: BSet,
    pub graph: RichOwnerGraph,
    pub audit: LevelAudit,
    /// Enumeration rank of each `n`-bit string, `u32::MAX` outside the set.
    rank: Vec<u32>,
    /// Base right node → ascending ranks of set members adjacent to it.
    owners: HashMap<u64, Vec<u32>>,
    /// Members of the set that are not `δ`-rich in it, ascending.
    pub non_rich: Vec<LeftNode>,
    /// Length of every program at this level.
    pub program_len: usize,
}

impl Level {
    fn new(key: GraphKey, set: BSet, graph: RichOwnerGraph) -> Result<Level, ListError> {
        let n = key.n;
        let mut rank = vec![u32::MAX; 1 << n];
        let mut owners: HashMap<u64, Vec<u32>> = HashMap::new();
        for (r, &x) in set.order.iter().enumerate() {
            rank[x as usize] = r as u32;
            for &zb in graph.extractor.row(x) {
                let list = owners.entry(zb as u64).or_default();
                if list.last() != Some(&(r as u32)) {
                    list.push(r as u32);
                }
            }
        }
        let non_rich = if set.is_empty() {
            Vec::new()
        } else {
            crate::richowner::non_rich_in(&graph, &set.subset(), &graph.delta)?
        };
        let audit = LevelAudit {
            ell: key.ell,
            size: set.len() as u64,
            first_type: set.first_type.len() as u64,
            second_type: set.second_type.len() as u64,
            non_rich: non_rich.len() as u64,
            allowed: 1u64 << (key.ell - key.c),
            extractor_allowance: 1u64 << graph.k,
        };
        let program_len = encode_graph_program(&key, 0, graph.m_out).len();
        Ok(Level { key, set, graph, audit, rank, owners, non_rich, program_len })
    }

    pub fn ell(&self) -> u32 {
        self.key.ell
    }

    pub fn d_out(&self) -> u32 {
        self.graph.d_out
    }

    pub fn contains(&self, x: u64) -> bool {
        self.rank[x as usize] != u32::MAX
    }

    /// The program reached from `x` along edge `j`.
    pub fn program(&self, x: u64, j: u64) -> Result<AssociatedProgram, ListError> {
        let z = self.graph.neighbor_at(x, j as usize)?;
        associated_program(&self.graph, z, self.key)
    }

    /// First member (by rank) adjacent to right node `z`, and members examined.
    pub fn first_neighbor(&self, z: RightId) -> (Option<LeftNode>, u64) {
        let miss = (None, self.set.len() as u64);
        let split = &self.graph.split;
        let zb = z / split.block();
        let rest = z % split.block();
        let (i, residue) = ((rest / split.p_t()) as usize, rest % split.p_t());
        if i >= split.t {
            return miss;
        }
        let p = split.primes[i];
        let Some(ranks) = self.owners.get(&zb) else {
            return miss;
        };
        for &r in ranks {
            let x = self.set.order[r as usize];
            if canonical_int(x, self.key.n) % p == residue {
                return (Some(x), r as u64 + 1);
            }
        }
        miss
    }

    /// Reference for [`Level::first_neighbor`]: scan the set and each member's
    /// full neighbor list.
    pub fn first_neighbor_by_scan(&self, z: RightId) -> Option<LeftNode> {
        self.set
            .order
            .iter()
            .copied()
            .find(|&x| (0..self.graph.graph.degree()).any(|j| self.graph.graph.neighbor_unchecked(x, j) == z))
    }

    /// Bitmap over edge indices `j` of `x`: bit `j` is set iff the program for
    /// edge `j` outputs `x`. Empty when `x` is not in the set.
    pub fn winners(&self, x: u64) -> Vec<u64> {
        let degree = self.graph.graph.degree();
        let mut win = vec![0u64; degree.div_ceil(64)];
        let Some(&me) = self.rank.get(x as usize).filter(|&&r| r != u32::MAX) else {
            return win;
        };
        for w in win.iter_mut() {
            *w = u64::MAX;
        }
        if !degree.is_multiple_of(64) {
            *win.last_mut().unwrap() = (1u64 << (degree % 64)) - 1;
        }
        let t = self.graph.split.t;
        let n = self.key.n;
        let primes = &self.graph.split.primes;
        // only primes below 2^n can divide a difference of two n-bit strings
        let small = primes.partition_point(|&p| p < 1u64 << n);
        let words = small.div_ceil(64);
        let mut collide = vec![0u64; words];
        let mut masks: HashMap<u64, Vec<u64>> = HashMap::new();
        for (b, &zb) in self.graph.extractor.row(x).iter().enumerate() {
            collide.iter_mut().for_each(|w| *w = 0);
            for &r in self.owners[&(zb as u64)].iter().take_while(|&&r| r < me) {
                let diff = x.abs_diff(self.set.order[r as usize]);
                let mask = masks.entry(diff).or_insert_with(|| {
                    let mut m = vec![0u64; words];
                    for (i, &p) in primes[..small].iter().enumerate() {
                        if diff.is_multiple_of(p) {
                            m[i / 64] |= 1 << (i % 64);
                        }
                    }
                    m
                });
                for (c, m) in collide.iter_mut().zip(mask.iter()) {
                    *c |= m;
                }
            }
            for (wi, &cw) in collide.iter().enumerate() {
                let mut bitsleft = cw;
                while bitsleft != 0 {
                    let i = wi * 64 + bitsleft.trailing_zeros() as usize;
                    bitsleft &= bitsleft - 1;
                    let j = b * t + i;
                    win[j / 64] &= !(1u64 << (j % 64));
                }
            }
        }
        win
    }
}

/// A graph-index program and its decoded fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociatedProgram {
    pub key: GraphKey,
    pub z: RightId,
    pub bits: Bits,
}

impl AssociatedProgram {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// The program associated with right node `z` of `g` under `key`.
pub fn associated_program(g: &RichOwnerGraph, z: RightId, key: GraphKey) -> Result<AssociatedProgram, ListError> {
    if z >= g.graph.right_size() {
        return Err(ListError::Parameter(format!("right node {z} out of range")));
    }
    if key.inv_delta == 0 || key.ell == 0 || key.n == 0 {
        return Err(ListError::Parameter("program fields must be positive".into()));
    }
    Ok(AssociatedProgram { key, z, bits: encode_graph_program(&key, z, g.m_out) })
}

/// The augmented levels for one `(n, δ)`.
pub struct Chain {
    pub n: u32,
    pub inv_delta: u64,
    pub e_const: u32,
    /// Ascending by level.
    pub levels: Vec<Level>,
    /// Master seed length: the largest level seed length.
    pub r: u32,
}

impl Chain {
    /// Builds top-down from `ℓ = n+e+1` to `ℓ = e+2`, auditing every level.
    pub fn build(
        table: &ComplexityTable,
        n: u32,
        inv_delta: u64,
        source: &dyn ExtractorSource,
        opts: &BuildOptions,
    ) -> Result<Chain, ListError> {
        if n == 0 || n > table.n_max {
            return Err(ListError::Parameter(format!("n = {n} outside 1..={}", table.n_max)));
        }
        if inv_delta == 0 {
            return Err(ListError::Parameter("1/delta must be positive".into()));
        }
        let delta = Rational::new(1, inv_delta);
        let e = table.e_const;
        let top = n + e + 1;
        let mut levels: Vec<Level> = Vec::new();
        for ell in (e + 2..=top).rev() {
            let wrap = |err: ListError| ListError::Level { ell, source: Box::new(err) };
            let upper = levels.last().map(|l| Upper { set: &l.set, graph: &l.graph.graph });
            let set = enumerate_b(table, n, ell, BVariant::Augmented { upper, delta }).map_err(|e| wrap(e.into()))?;
            let graph = build_rich_owner(n, ell, CHAIN_C, delta, source, opts).map_err(|e| wrap(e.into()))?;
            let key = GraphKey { augmented: true, ell, c: CHAIN_C, inv_delta, n };
            let level = Level::new(key, set, graph).map_err(wrap)?;
            let a = &level.audit;
            if !a.size_ok(false) {
                return Err(ListError::Audit { ell, what: "|B|", count: a.size, allowed: 1 << ell });
            }
            if let Some(above) = levels.last() {
                if a.second_type > above.audit.allowed {
                    return Err(ListError::Audit { ell, what: "second-type count", count: a.second_type, allowed: above.audit.allowed });
                }
            }
            if !a.rich_owner_ok() {
                return Err(ListError::Audit { ell, what: "non-rich count", count: a.non_rich, allowed: a.allowed });
            }
            levels.push(level);
        }
        levels.reverse();
        let r = levels.iter().map(Level::d_out).max().expect("at least one level");
        Ok(Chain { n, inv_delta, e_const: e, levels, r })
    }

    pub fn level(&self, ell: u32) -> Option<&Level> {
        self.levels.iter().find(|l| l.ell() == ell)
    }

    /// The prefix of a master seed read by a level.
    pub fn prefix(&self, level: &Level, seed: u64) -> u64 {
        seed >> (self.r - level.d_out())
    }

    /// One program per level, all driven by the same master seed.
    pub fn generate_list(&self, x: u64, seed: u64) -> Result<CandidateProgramList, ListError> {
        if x >> self.n != 0 {
            return Err(ListError::Parameter(format!("{x:#x} is not a {}-bit string", self.n)));
        }
        if self.r < 64 && seed >> self.r != 0 {
            return Err(ListError::Parameter(format!("seed {seed:#x} longer than {} bits", self.r)));
        }
        let entries = self
            .levels
            .iter()
            .map(|level| {
                let prefix = self.prefix(level, seed);
                Ok(ListEntry { ell: level.ell(), seed_prefix: prefix, seed_bits: level.d_out(), program: level.program(x, prefix)? })
            })
            .collect::<Result<Vec<_>, ListError>>()?;
        Ok(CandidateProgramList { x, n: self.n, inv_delta: self.inv_delta, seed, r: self.r, entries })
    }

    /// Exact hit profile of `x` over all `2^r` master seeds.
    pub fn exact_success_profile(&self, table: &ComplexityTable, x: u64, c_star: u32) -> Result<SuccessProfile, ListError> {
        if self.r > MAX_PROFILE_SEED_BITS {
            return Err(ListError::SeedCap { r: self.r });
        }
        let cx = table.c(self.n, x);
        let mut winners: Vec<LevelWinners> = self
            .levels
            .iter()
            .filter(|l| l.contains(x))
            .map(|l| LevelWinners { ell: l.ell(), overhead: l.program_len as i64 - cx as i64, d: l.d_out(), bits: l.winners(x) })
            .collect();
        winners.sort_by_key(|w| (w.overhead, w.ell));
        let mut p = SuccessProfile { x, n: self.n, inv_delta: self.inv_delta, c_star, c_of_x: cx, r: self.r, hits: 0, winners };
        p.hits = p.count_hits(c_star as i64);
        Ok(p)
    }

    /// The least threshold at which `x` reaches success probability `1 − δ`,
    /// or `None` if no threshold does.
    pub fn min_c_star(&self, table: &ComplexityTable, x: u64) -> Result<Option<i64>, ListError> {
        let p = self.exact_success_profile(table, x, 0)?;
        let need = ((1u64 << self.r) as u128 * (self.inv_delta as u128 - 1)).div_ceil(self.inv_delta as u128) as u64;
        let mut thresholds: Vec<i64> = p.winners.iter().map(|w| w.overhead).collect();
        thresholds.dedup();
        Ok(thresholds.into_iter().find(|&c| p.count_hits(c) >= need))
    }
}

/// One list entry with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListEntry {
    pub ell: u32,
    pub seed_prefix: u64,
    pub seed_bits: u32,
    pub program: AssociatedProgram,
}

/// The output of the list algorithm: exactly `n` programs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateProgramList {
    pub x: u64,
    pub n: u32,
    pub inv_delta: u64,
    pub seed: u64,
    pub r: u32,
    pub entries: Vec<ListEntry>,
}

impl CandidateProgramList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        let xw = (self.n as usize).div_ceil(4).max(1);
        let sw = (self.r as usize).div_ceil(4).max(1);
        writeln!(w, "LIST x={:0xw$x} n={} inv_delta={} seed={:0sw$x} r={}", self.x, self.n, self.inv_delta, self.seed, self.r)?;
        for e in &self.entries {
            writeln!(
                w,
                "entry ell={} prefix={:x} bits={} z={} len={} program={}",
                e.ell,
                e.seed_prefix,
                e.seed_bits,
                e.program.z,
                e.program.len(),
                e.program.bits.to_prefixed_hex()
            )?;
        }
        Ok(())
    }
}

/// Winning edge indices of `x` at one level.
#[derive(Clone, Debug)]
pub struct LevelWinners {
    pub ell: u32,
    /// Program length minus `C(x)`.
    pub overhead: i64,
    pub d: u32,
    pub bits: Vec<u64>,
}

impl LevelWinners {
    fn wins(&self, j: u64) -> bool {
        self.bits[(j / 64) as usize] >> (j % 64) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }
}

/// Exact per-seed outcome of the list algorithm for one string.
#[derive(Clone, Debug)]
pub struct SuccessProfile {
    pub x: u64,
    pub n: u32,
    pub inv_delta: u64,
    pub c_star: u32,
    pub c_of_x: u32,
    pub r: u32,
    /// Seeds whose list holds a `c_star`-short program for `x`.
    pub hits: u64,
    /// Levels containing `x`, by ascending overhead.
    pub winners: Vec<LevelWinners>,
}

impl SuccessProfile {
    pub fn total(&self) -> u64 {
        1u64 << self.r
    }

    pub fn probability(&self) -> Rational {
        Rational::new(self.hits, self.total())
    }

    /// Hits when every level with overhead at most `threshold` counts.
    pub fn count_hits(&self, threshold: i64) -> u64 {
        let active: Vec<&LevelWinners> = self.winners.iter().filter(|w| w.overhead <= threshold).collect();
        match active.as_slice() {
            [] => 0,
            [only] => only.count() << (self.r - only.d),
            _ => {
                // expand every level to master-seed resolution and OR
                let words = (self.total() as usize).div_ceil(64);
                let mut acc = vec![0u64; words];
                for w in active {
                    let shift = self.r - w.d;
                    for j in 0..(1u64 << w.d) {
                        if w.wins(j) {
                            set_range(&mut acc, j << shift, 1u64 << shift);
                        }
                    }
                }
                acc.iter().map(|w| w.count_ones() as u64).sum()
            }
        }
    }

    /// Whether master seed `seed` is a hit.
    pub fn hit(&self, seed: u64) -> bool {
        self.winners
            .iter()
            .any(|w| w.overhead <= self.c_star as i64 && w.wins(seed >> (self.r - w.d)))
    }

    /// Smallest overhead among entries computing `x` under `seed`.
    pub fn best_overhead(&self, seed: u64) -> Option<i64> {
        self.winners.iter().find(|w| w.wins(seed >> (self.r - w.d))).map(|w| w.overhead)
    }

    /// `x=<hex> seed=<hex> hit=<0|1> best_overhead=<int>` for every seed in `seeds`.
    pub fn write_records(&self, seeds: std::ops::Range<u64>, mut w: impl Write) -> std::io::Result<()> {
        let xw = (self.n as usize).div_ceil(4).max(1);
        let sw = (self.r as usize).div_ceil(4).max(1);
        for seed in seeds {
            writeln!(
                w,
                "x={:0xw$x} seed={:0sw$x} hit={} best_overhead={}",
                self.x,
                seed,
                self.hit(seed) as u8,
                self.best_overhead(seed).unwrap_or(-1)
            )?;
        }
        Ok(())
    }
}

fn set_range(acc: &mut [u64], start: u64, len: u64) {
    let (mut pos, end) = (start, start + len);
    while pos < end {
        let (word, bit) = ((pos / 64) as usize, pos % 64);
        let take = (64 - bit).min(end - pos);
        let mask = if take == 64 { u64::MAX } else { ((1u64 << take) - 1) << bit };
        acc[word] |= mask;
        pos += take;
    }
}

/// `c` used by the algorithm given `C(x)`: `ceil(3·log2 n)`, kept below `ℓ`.
pub fn promise_c(n: u32, ell: u32) -> u32 {
    let three_log = (3.0 * (n.max(1) as f64).log2()).ceil() as u32;
    three_log.min(ell.saturating_sub(1))
}

/// Outcome of the algorithm that is told `C(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromiseRun {
    pub program: AssociatedProgram,
    pub seed_bits: u32,
    /// `false` when the supplied value differs from the tabulated `C(x)`.
    pub promise_holds: bool,
}

/// Exact seed statistics of the promise algorithm for one string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromiseProfile {
    pub x: u64,
    pub ell: u32,
    pub c: u32,
    pub seed_bits: u32,
    pub successes: u64,
    /// `x ∈ B_{n,ℓ}` but not `δ`-rich there.
    pub in_bad_set: bool,
    pub program_len: usize,
}

impl PromiseProfile {
    pub fn probability(&self) -> Rational {
        Rational::new(self.successes, 1u64 << self.seed_bits)
    }
}

/// Shared state for running the algorithms: the machine, the complexity
/// table, an extractor source, and every level built so far.
pub struct Lab {
    pub machine: ToyMachine,
    pub table: Arc<ComplexityTable>,
    pub source: Arc<dyn ExtractorSource>,
    pub opts: BuildOptions,
    chains: Mutex<HashMap<(u32, u64), Arc<Chain>>>,
    plain: Mutex<HashMap<GraphKey, Arc<Level>>>,
}

impl Lab {
    pub fn new(machine: ToyMachine, table: Arc<ComplexityTable>, source: Arc<dyn ExtractorSource>, opts: BuildOptions) -> Lab {
        Lab { machine, table, source, opts, chains: Mutex::new(HashMap::new()), plain: Mutex::new(HashMap::new()) }
    }

    /// The chain for `(n, 1/δ)`, built on first use.
    pub fn chain(&self, n: u32, inv_delta: u64) -> Result<Arc<Chain>, ListError> {
        if let Some(c) = self.chains.lock().unwrap().get(&(n, inv_delta)) {
            return Ok(Arc::clone(c));
        }
        let chain = Arc::new(Chain::build(&self.table, n, inv_delta, self.source.as_ref(), &self.opts)?);
        self.chains.lock().unwrap().insert((n, inv_delta), Arc::clone(&chain));
        Ok(chain)
    }

    /// A plain level `(B = {C(x) < ℓ}, graph for (ℓ, c, δ))`, built on first use.
    pub fn plain_level(&self, n: u32, ell: u32, c: u32, inv_delta: u64) -> Result<Arc<Level>, ListError> {
        let key = GraphKey { augmented: false, ell, c, inv_delta, n };
        if let Some(l) = self.plain.lock().unwrap().get(&key) {
            return Ok(Arc::clone(l));
        }
        if inv_delta == 0 {
            return Err(ListError::Parameter("1/delta must be positive".into()));
        }
        let set = enumerate_b(&self.table, n, ell, BVariant::Plain)?;
        let graph = build_rich_owner(n, ell, c, Rational::new(1, inv_delta), self.source.as_ref(), &self.opts)?;
        let level = Arc::new(Level::new(key, set, graph)?);
        self.plain.lock().unwrap().insert(key, Arc::clone(&level));
        Ok(level)
    }

    pub fn generate_list(&self, x: u64, n: u32, inv_delta: u64, seed: u64) -> Result<CandidateProgramList, ListError> {
        self.chain(n, inv_delta)?.generate_list(x, seed)
    }

    /// [`Lab::generate_list`] with a wall-clock budget on the call.
    pub fn generate_list_within(
        &self,
        x: u64,
        n: u32,
        inv_delta: u64,
        seed: u64,
        budget: Duration,
    ) -> Result<CandidateProgramList, ListError> {
        let start = Instant::now();
        let list = self.generate_list(x, n, inv_delta, seed)?;
        let took = start.elapsed();
        if took > budget {
            return Err(ListError::TimeBudget { took, budget });
        }
        Ok(list)
    }

    /// The single-level algorithm: the program along edge `seed` (a
    /// `d_out`-bit index) in the plain level `(ℓ, c, δ)`.
    pub fn fixed_length_generate(&self, x: u64, n: u32, ell: u32, c: u32, inv_delta: u64, seed: u64) -> Result<AssociatedProgram, ListError> {
        let level = self.plain_level(n, ell, c, inv_delta)?;
        if seed >> level.d_out() != 0 {
            return Err(ListError::Parameter(format!("seed longer than {} bits", level.d_out())));
        }
        level.program(x, seed)
    }

    /// The algorithm given `C(x)`: level `ℓ = C(x) + 1`, `c` from [`promise_c`].
    pub fn short_program_given_c(&self, x: u64, n: u32, c_of_x: u32, inv_delta: u64, seed: u64) -> Result<PromiseRun, ListError> {
        let ell = c_of_x + 1;
        let c = promise_c(n, ell);
        let level = self.plain_level(n, ell, c, inv_delta)?;
        let program = self.fixed_length_generate(x, n, ell, c, inv_delta, seed)?;
        Ok(PromiseRun { program, seed_bits: level.d_out(), promise_holds: self.table.c(n, x) == c_of_x })
    }

    /// Exact success count of the promise algorithm over all its seeds.
    pub fn promise_profile(&self, x: u64, n: u32, inv_delta: u64) -> Result<PromiseProfile, ListError> {
        let ell = self.table.c(n, x) + 1;
        let c = promise_c(n, ell);
        let level = self.plain_level(n, ell, c, inv_delta)?;
        if level.d_out() > MAX_PROFILE_SEED_BITS {
            return Err(ListError::SeedCap { r: level.d_out() });
        }
        let successes = level.winners(x).iter().map(|w| w.count_ones() as u64).sum();
        let in_bad_set = level.non_rich.binary_search(&x).is_ok();
        Ok(PromiseProfile { x, ell, c, seed_bits: level.d_out(), successes, in_bad_set, program_len: level.program_len })
    }

    /// Runs `p` on the machine with this lab answering graph-index programs.
    pub fn run(&self, p: &Bits) -> Option<Bits> {
        self.machine.run(p, Some(self))
    }

    /// Profiles every `n`-bit string; results in lexicographic order.
    pub fn profile_all(&self, n: u32, inv_delta: u64, c_star: u32) -> Result<Vec<SuccessProfile>, ListError> {
        let chain = self.chain(n, inv_delta)?;
        (0..(1u64 << n))
            .into_par_iter()
            .map(|x| {
                let mut p = chain.exact_success_profile(&self.table, x, c_star)?;
                p.winners.iter_mut().for_each(|w| w.bits = Vec::new());
                Ok(p)
            })
            .collect()
    }

    fn level_for(&self, key: &GraphKey) -> Option<LevelRef> {
        if key.augmented {
            if key.c != CHAIN_C {
                return None;
            }
            let chain = self.chains.lock().unwrap().get(&(key.n, key.inv_delta)).cloned()?;
            let idx = chain.levels.iter().position(|l| l.key == *key)?;
            Some(LevelRef::Chain(chain, idx))
        } else {
            self.plain.lock().unwrap().get(key).cloned().map(LevelRef::Plain)
        }
    }
}

enum LevelRef {
    Chain(Arc<Chain>, usize),
    Plain(Arc<Level>),
}

impl LevelRef {
    fn level(&self) -> &Level {
        match self {
            LevelRef::Chain(c, i) => &c.levels[*i],
            LevelRef::Plain(l) => l,
        }
    }
}

impl GraphIndexResolver for Lab {
    fn right_bits(&self, key: &GraphKey) -> Option<u32> {
        self.level_for(key).map(|l| l.level().graph.m_out)
    }

    fn first_neighbor(&self, key: &GraphKey, z: u64) -> (Option<u64>, u64) {
        match self.level_for(key) {
            Some(l) => l.level().first_neighbor(z),
            None => (None, 0),
        }
    }
}

/// `(|program| − ℓ) / (c + log2(n/δ))` for a level.
pub fn length_ratio(level: &Level) -> f64 {
    let unit = crate::richowner::length_unit(level.key.n, level.key.c, &Rational::new(1, level.key.inv_delta));
    (level.program_len as f64 - level.key.ell as f64) / unit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::complexity_table;
    use crate::richowner::SearchSource;
    use crate::rng::SplitMix64;

    fn lab() -> Lab {
        let machine = ToyMachine::default();
        let table = Arc::new(complexity_table(&machine, 8).unwrap());
        Lab::new(machine, table, Arc::new(SearchSource::new(3)), BuildOptions::default())
    }

    #[test]
    fn set_range_marks_exact_bits() {
        let mut acc = vec![0u64; 3];
        set_range(&mut acc, 60, 70);
        let ones: u32 = acc.iter().map(|w| w.count_ones()).sum();
        assert_eq!(ones, 70);
        assert_eq!(acc[0] >> 60, 0xf);
        assert_eq!(acc[2], (1 << 2) - 1);
    }

    #[test]
    fn promise_c_values() {
        assert_eq!(promise_c(8, 11), 9);
        assert_eq!(promise_c(8, 4), 3);
        assert_eq!(promise_c(1, 5), 0);
    }

    #[test]
    fn small_chain_lists_have_n_entries() {
        let lab = lab();
        let chain = lab.chain(4, 2).unwrap();
        assert_eq!(chain.levels.len(), 4);
        assert_eq!(chain.levels[0].ell(), chain.e_const + 2);
        let mut rng = SplitMix64::new(1);
        for x in 0..16 {
            let seed = rng.next_bits(chain.r);
            let list = chain.generate_list(x, seed).unwrap();
            assert_eq!(list.len(), 4);
            for (i, e) in list.entries.iter().enumerate() {
                assert_eq!(e.ell, chain.e_const + 2 + i as u32);
            }
            assert_eq!(list, chain.generate_list(x, seed).unwrap());
        }
    }

    #[test]
    fn first_neighbor_matches_scan() {
        let lab = lab();
        let chain = lab.chain(4, 2).unwrap();
        let top = chain.levels.last().unwrap();
        let mut rng = SplitMix64::new(9);
        for _ in 0..40 {
            let x = rng.below(16);
            let j = rng.below(top.graph.graph.degree() as u64);
            let z = top.graph.neighbor_at(x, j as usize).unwrap();
            assert_eq!(top.first_neighbor(z).0, top.first_neighbor_by_scan(z));
            let other = rng.below(top.graph.graph.right_size());
            assert_eq!(top.first_neighbor(other).0, top.first_neighbor_by_scan(other));
        }
    }

    #[test]
    fn winners_agree_with_the_machine() {
        let lab = lab();
        let chain = lab.chain(4, 2).unwrap();
        let top = chain.levels.last().unwrap();
        let mut rng = SplitMix64::new(2);
        for x in 0..16 {
            let win = top.winners(x);
            for _ in 0..30 {
                let j = rng.below(top.graph.graph.degree() as u64);
                let p = top.program(x, j).unwrap();
                let out = lab.run(&p.bits);
                let wins = win[(j / 64) as usize] >> (j % 64) & 1 == 1;
                assert_eq!(out == Some(Bits::from_value(x as u128, 4)), wins, "x {x} j {j}");
            }
        }
    }
}
