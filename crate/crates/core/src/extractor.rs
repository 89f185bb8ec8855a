//! Small seeded extractors: generation, exact and sampled verification, and
//! the richness audit that holds for every verified extractor graph.
//!
//! A table `E: {0,1}^n × {0,1}^d → {0,1}^m` is a `(k, ε)` extractor when for
//! every flat source `X` of support `2^k` the output distribution of
//! `E(X, U_d)` is strictly closer than `ε` to uniform in statistical distance.
//! All distances are exact rationals.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::bigraph::{self, GraphError, LeftNode, LeftRegularGraph, LeftSubset};
use crate::ratio::{ceil_log2, ceil_log2_inverse, in_unit_interval, parse_rational, render, Rational};
use crate::rng::{derive_seed, SplitMix64};

/// Default cap on the number of flat sources enumerated by exact verification.
pub const DEFAULT_EXACT_BUDGET: u64 = 10_000_000;

/// Largest table (`2^(n+d)` entries) the generator will allocate.
pub const MAX_TABLE_LOG2: u32 = 26;

#[derive(Debug, Error)]
pub enum ExtractorError {
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("invalid flat source: {0}")]
    InvalidSource(String),
    #[error("exact verification needs {subsets} flat sources, budget is {budget}; use a sampled audit")]
    BudgetExceeded { subsets: String, budget: u64 },
    #[error("no verified table within {attempts} attempts (best worst-case deviation {worst})")]
    RetryCapExhausted { attempts: u32, worst: String, best: Box<ExtractorInstance> },
    #[error("extractor is not exact-verified; the richness bound does not apply")]
    NotExactVerified,
    #[error("average right degree {avg} exceeds the supplied bound {bound}")]
    HypothesisViolated { avg: String, bound: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Unverified,
    ExactVerified,
    SampledAudited { trials: u64, worst: Rational },
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Unverified => f.write_str("unverified"),
            Status::ExactVerified => f.write_str("exact"),
            Status::SampledAudited { trials, worst } => write!(f, "sampled:{}:{}", trials, render(worst)),
        }
    }
}

impl std::str::FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unverified" => Ok(Status::Unverified),
            "exact" => Ok(Status::ExactVerified),
            _ => {
                let rest = s.strip_prefix("sampled:").ok_or_else(|| format!("unknown status {s:?}"))?;
                let (trials, worst) = rest.split_once(':').ok_or("malformed sampled status")?;
                Ok(Status::SampledAudited {
                    trials: trials.parse().map_err(|_| "bad trial count")?,
                    worst: parse_rational(worst).ok_or("bad deviation")?,
                })
            }
        }
    }
}

/// A concrete extractor table with its claimed `(k, ε)` certificate.
#[derive(Clone, PartialEq, Eq)]
pub struct ExtractorInstance {
    pub n: u32,
    pub k: u32,
    pub d: u32,
    pub m: u32,
    pub epsilon: Rational,
    table: Arc<Vec<u32>>,
    pub status: Status,
    pub seed: u64,
}

impl fmt::Debug for ExtractorInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ExtractorInstance(n={} k={} d={} m={} eps={} status={} seed={})",
            self.n,
            self.k,
            self.d,
            self.m,
            render(&self.epsilon),
            self.status,
            self.seed
        )
    }
}

impl ExtractorInstance {
    fn check_shape(n: u32, k: u32, d: u32, m: u32, eps: &Rational) -> Result<(), ExtractorError> {
        if k > n {
            return Err(ExtractorError::Parameter(format!("k = {k} exceeds n = {n}")));
        }
        if m > k + d {
            return Err(ExtractorError::Parameter(format!("m = {m} exceeds k + d = {}", k + d)));
        }
        if !in_unit_interval(eps) {
            return Err(ExtractorError::Parameter(format!("epsilon {} outside (0, 1]", render(eps))));
        }
        if n + d > MAX_TABLE_LOG2 || m > 31 {
            return Err(ExtractorError::Parameter(format!("table 2^{} too large", n + d)));
        }
        Ok(())
    }

    /// Builds an instance from an explicit table in `x`-major order.
    pub fn from_table(n: u32, k: u32, d: u32, m: u32, epsilon: Rational, table: Vec<u32>) -> Result<Self, ExtractorError> {
        Self::check_shape(n, k, d, m, &epsilon)?;
        if table.len() as u64 != 1u64 << (n + d) {
            return Err(ExtractorError::Parameter("table length is not 2^(n+d)".into()));
        }
        if table.iter().any(|&z| (z as u64) >> m != 0) {
            return Err(ExtractorError::Parameter("table entry exceeds m bits".into()));
        }
        Ok(ExtractorInstance { n, k, d, m, epsilon, table: Arc::new(table), status: Status::Unverified, seed: 0 })
    }

    /// A uniformly random table drawn from the pinned stream.
    pub fn random(n: u32, k: u32, d: u32, m: u32, epsilon: Rational, seed: u64) -> Result<Self, ExtractorError> {
        Self::check_shape(n, k, d, m, &epsilon)?;
        let mut rng = SplitMix64::new(seed);
        let table = (0..(1u64 << (n + d))).map(|_| rng.next_bits(m) as u32).collect();
        Ok(ExtractorInstance { n, k, d, m, epsilon, table: Arc::new(table), status: Status::Unverified, seed })
    }

    #[inline]
    pub fn output(&self, x: LeftNode, y: u64) -> u32 {
        self.table[((x as usize) << self.d) | y as usize]
    }

    pub fn row(&self, x: LeftNode) -> &[u32] {
        let start = (x as usize) << self.d;
        &self.table[start..start + (1 << self.d)]
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn entropy_loss(&self) -> u32 {
        self.k + self.d - self.m
    }

    pub fn is_exact_verified(&self) -> bool {
        self.status == Status::ExactVerified
    }

    /// The graph `G_E`: left `{0,1}^n`, right `{0,1}^m`, slot `y` of `x` is `E(x, y)`.
    pub fn graph(&self) -> LeftRegularGraph {
        let table = Arc::clone(&self.table);
        let d = self.d;
        LeftRegularGraph::from_fn(
            self.n,
            1usize << self.d,
            1u64 << self.m,
            format!("extractor(n={},k={},d={},m={},seed={})", self.n, self.k, self.d, self.m, self.seed),
            move |x, j| table[((x as usize) << d) | j] as u64,
        )
        .expect("degree is positive")
    }
}

/// A flat distribution: uniform on a support of size `2^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatSource {
    pub support: LeftSubset,
}

impl FlatSource {
    pub fn new(support: LeftSubset) -> Result<Self, ExtractorError> {
        if !support.len().is_power_of_two() {
            return Err(ExtractorError::InvalidSource(format!("support size {} is not a power of two", support.len())));
        }
        Ok(FlatSource { support })
    }

    /// `log2` of the support size, i.e. the min-entropy.
    pub fn min_entropy(&self) -> u32 {
        self.support.len().trailing_zeros()
    }
}

/// Lists the support in hex, e.g. `{0,3}`.
impl std::fmt::Display for FlatSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let items: Vec<String> = self.support.iter().map(|x| format!("{x:x}")).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

fn deviation_from_histogram(hist: &[u64], total: u64) -> Rational {
    let bins = hist.len() as u64;
    let l1: u64 = hist.iter().map(|&c| (c * bins).abs_diff(total)).sum();
    Rational::new(l1, 2 * total * bins)
}

/// `max_A |P[E(X,U_d) ∈ A] − |A|/M|`, which equals half the L1 distance to uniform.
pub fn tv_deviation(e: &ExtractorInstance, x: &FlatSource) -> Result<Rational, ExtractorError> {
    if x.support.n() != e.n {
        return Err(ExtractorError::InvalidSource(format!("support over {}-bit strings", x.support.n())));
    }
    if !x.support.len().is_power_of_two() {
        return Err(ExtractorError::InvalidSource("support size is not a power of two".into()));
    }
    let mut hist = vec![0u64; 1 << e.m];
    for v in x.support.iter() {
        for &z in e.row(v) {
            hist[z as usize] += 1;
        }
    }
    Ok(deviation_from_histogram(&hist, (x.support.len() as u64) << e.d))
}

/// Outcome of an exact verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub verified: bool,
    pub worst: Rational,
    /// Lexicographically first flat source attaining `worst`.
    pub witness: FlatSource,
    pub sources_checked: u64,
}

/// `binom(n, r)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

struct Best {
    dev: Rational,
    witness: Vec<LeftNode>,
    count: u64,
}

fn enumerate_sources(e: &ExtractorInstance, pool: &[LeftNode], size: usize, first: usize) -> Best {
    let mut hist = vec![0u64; 1 << e.m];
    let total = (size as u64) << e.d;
    let mut chosen = Vec::with_capacity(size);
    let mut best = Best { dev: Rational::new(0, 1), witness: Vec::new(), count: 0 };

    fn rec(
        e: &ExtractorInstance,
        pool: &[LeftNode],
        size: usize,
        start: usize,
        hist: &mut [u64],
        chosen: &mut Vec<LeftNode>,
        total: u64,
        best: &mut Best,
    ) {
        if chosen.len() == size {
            best.count += 1;
            let dev = deviation_from_histogram(hist, total);
            if best.witness.is_empty() || dev > best.dev {
                best.dev = dev;
                best.witness = chosen.clone();
            }
            return;
        }
        let need = size - chosen.len();
        for i in start..=pool.len() - need {
            let x = pool[i];
            for &z in e.row(x) {
                hist[z as usize] += 1;
            }
            chosen.push(x);
            rec(e, pool, size, i + 1, hist, chosen, total, best);
            chosen.pop();
            for &z in e.row(x) {
                hist[z as usize] -= 1;
            }
        }
    }

    let x0 = pool[first];
    for &z in e.row(x0) {
        hist[z as usize] += 1;
    }
    chosen.push(x0);
    rec(e, pool, size, first + 1, &mut hist, &mut chosen, total, &mut best);
    best
}

/// Exact verification over every flat source of support `2^k` inside `domain`.
///
/// Sources are enumerated as lexicographic combinations, partitioned by their
/// first element across the worker pool.
pub fn verify_exact_on(e: &ExtractorInstance, domain: &LeftSubset, budget: u64) -> Result<Verification, ExtractorError> {
    if domain.n() != e.n {
        return Err(ExtractorError::InvalidSource("domain over the wrong bit length".into()));
    }
    let size = 1usize << e.k;
    let subsets = binomial(domain.len() as u64, size as u64);
    if subsets > budget as u128 {
        return Err(ExtractorError::BudgetExceeded {
            subsets: if subsets == u128::MAX { "more than 2^128".into() } else { subsets.to_string() },
            budget,
        });
    }
    let pool: Vec<LeftNode> = domain.iter().collect();
    if pool.len() < size {
        // no flat source of this entropy lives in the domain: vacuously an extractor
        return Ok(Verification {
            verified: true,
            worst: Rational::new(0, 1),
            witness: FlatSource { support: LeftSubset::empty(e.n) },
            sources_checked: 0,
        });
    }
    let parts: Vec<Best> = (0..=pool.len() - size)
        .into_par_iter()
        .map(|first| enumerate_sources(e, &pool, size, first))
        .collect();
    let mut count = 0;
    let mut best: Option<Best> = None;
    for part in parts {
        count += part.count;
        // parts arrive in lexicographic order of their first element; keep the first maximum
        if best.as_ref().is_none_or(|b| part.dev > b.dev) {
            best = Some(part);
        }
    }
    let best = best.expect("at least one source");
    Ok(Verification {
        verified: best.dev < e.epsilon,
        worst: best.dev,
        witness: FlatSource { support: LeftSubset::new(e.n, best.witness)? },
        sources_checked: count,
    })
}

/// Exact verification over all of `{0,1}^n`; on success the status becomes
/// exact-verified, on failure it is reset to unverified.
pub fn verify_exact(e: &mut ExtractorInstance, budget: u64) -> Result<Verification, ExtractorError> {
    let v = verify_exact_on(e, &LeftSubset::full(e.n), budget)?;
    e.status = if v.verified { Status::ExactVerified } else { Status::Unverified };
    Ok(v)
}

/// Worst deviation over `trials` flat sources drawn from the pinned stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledAudit {
    pub trials: u64,
    pub worst: Rational,
    pub witness: FlatSource,
}

pub fn audit_sampled(e: &ExtractorInstance, trials: u64, seed: u64) -> SampledAudit {
    assert!(trials >= 1, "at least one trial");
    let mut rng = SplitMix64::new(seed);
    let mut best: Option<(Rational, FlatSource)> = None;
    for _ in 0..trials {
        let support = LeftSubset::new(e.n, rng.sample_distinct(1u64 << e.n, 1 << e.k)).expect("in range");
        let x = FlatSource { support };
        let dev = tv_deviation(e, &x).expect("well-formed source");
        if best.as_ref().is_none_or(|(b, _)| dev > *b) {
            best = Some((dev, x));
        }
    }
    let (worst, witness) = best.unwrap();
    SampledAudit { trials, worst, witness }
}

/// Parameters of the randomized extractor search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchParams {
    pub n: u32,
    pub k: u32,
    pub epsilon: Rational,
    /// Additive constant in the seed length.
    pub a_d: u32,
    /// Additive constant in the entropy loss.
    pub a_m: u32,
    pub retries: u32,
    pub exact_budget: u64,
    /// Trials for the sampled regime; `None` means exact verification only.
    pub sampled_trials: Option<u64>,
}

impl SearchParams {
    pub fn new(n: u32, k: u32, epsilon: Rational) -> Self {
        SearchParams {
            n,
            k,
            epsilon,
            a_d: 2,
            a_m: 2,
            retries: 16,
            exact_budget: DEFAULT_EXACT_BUDGET,
            sampled_trials: None,
        }
    }

    /// `d = ceil(log2 max(n−k, 1)) + 2·ceil(log2 1/ε) + A_d`.
    pub fn seed_length(&self) -> u32 {
        ceil_log2((self.n.saturating_sub(self.k)).max(1) as u64) + 2 * ceil_log2_inverse(&self.epsilon) + self.a_d
    }

    /// `m = k + d − 2·ceil(log2 1/ε) − A_m`.
    pub fn output_length(&self) -> Result<u32, ExtractorError> {
        let m = self.k as i64 + self.seed_length() as i64 - 2 * ceil_log2_inverse(&self.epsilon) as i64 - self.a_m as i64;
        u32::try_from(m).map_err(|_| ExtractorError::Parameter(format!("output length {m} is negative")))
    }

    pub fn exact_feasible(&self) -> bool {
        binomial(1u64 << self.n, 1u64 << self.k) <= self.exact_budget as u128
    }
}

/// Draws random tables until one verifies.
///
/// Attempt `i` uses seed `seed` for `i = 0` and a derived seed afterwards;
/// the returned instance records the seed of its own table.
pub fn search_extractor(params: &SearchParams, seed: u64) -> Result<ExtractorInstance, ExtractorError> {
    if params.k > params.n {
        return Err(ExtractorError::Parameter(format!("k = {} exceeds n = {}", params.k, params.n)));
    }
    if !in_unit_interval(&params.epsilon) {
        return Err(ExtractorError::Parameter("epsilon outside (0, 1]".into()));
    }
    let d = params.seed_length();
    let m = params.output_length()?;
    let exact = params.exact_feasible();
    if !exact && params.sampled_trials.is_none() {
        return Err(ExtractorError::BudgetExceeded {
            subsets: binomial(1u64 << params.n, 1u64 << params.k).to_string(),
            budget: params.exact_budget,
        });
    }
    let mut best: Option<(Rational, ExtractorInstance)> = None;
    for attempt in 0..params.retries.max(1) {
        let attempt_seed = if attempt == 0 { seed } else { derive_seed(seed, &[attempt as u64]) };
        let mut inst = ExtractorInstance::random(params.n, params.k, d, m, params.epsilon, attempt_seed)?;
        if params.epsilon == Rational::new(1, 1) {
            // every deviation is at most 1 - 1/M < 1
            inst.status = Status::ExactVerified;
            return Ok(inst);
        }
        let worst = if exact {
            let v = verify_exact(&mut inst, params.exact_budget)?;
            if v.verified {
                return Ok(inst);
            }
            v.worst
        } else {
            let trials = params.sampled_trials.expect("checked above");
            let audit = audit_sampled(&inst, trials, derive_seed(attempt_seed, &[0x5a4d]));
            if audit.worst < params.epsilon {
                inst.status = Status::SampledAudited { trials, worst: audit.worst };
                return Ok(inst);
            }
            audit.worst
        };
        if best.as_ref().is_none_or(|(b, _)| worst < *b) {
            best = Some((worst, inst));
        }
    }
    let (worst, best) = best.expect("at least one attempt");
    Err(ExtractorError::RetryCapExhausted { attempts: params.retries.max(1), worst: render(&worst), best: Box::new(best) })
}

/// `|B| · degree / right_size`: the average number of edges from `B` per right node.
pub fn avg_right_degree(g: &LeftRegularGraph, b: &LeftSubset) -> Rational {
    Rational::new(b.len() as u64 * g.degree() as u64, g.right_size())
}

/// Result of the extractor richness audit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RichAudit {
    pub s: usize,
    pub delta: Rational,
    pub offenders: Vec<LeftNode>,
}

impl RichAudit {
    pub fn count(&self) -> usize {
        self.offenders.len()
    }
}

/// Members of `b` that are not `(ceil(a/ε), 2ε)`-rich in the extractor graph
/// restricted to `b`. For an exact-verified `(k, ε)` extractor whose
/// restriction has average right degree at most `a`, there are fewer than `2^k`.
pub fn audit_rich_bound(e: &ExtractorInstance, a: &Rational, b: &LeftSubset) -> Result<RichAudit, ExtractorError> {
    if !e.is_exact_verified() {
        return Err(ExtractorError::NotExactVerified);
    }
    let s = (*a / e.epsilon).ceil().to_integer().max(1) as usize;
    let delta = (e.epsilon * 2).min(Rational::new(1, 1));
    if b.is_empty() {
        return Ok(RichAudit { s, delta, offenders: Vec::new() });
    }
    let g = e.graph().restrict(b)?;
    let avg = avg_right_degree(&g, b);
    if avg > *a {
        return Err(ExtractorError::HypothesisViolated { avg: render(&avg), bound: render(a) });
    }
    let offenders = bigraph::non_rich_members(&g, b, s, &delta)?;
    Ok(RichAudit { s, delta, offenders })
}

/// Writes the extractor table file (dense hex block).
pub fn write_extractor(e: &ExtractorInstance, mut w: impl Write) -> Result<(), ExtractorError> {
    writeln!(
        w,
        "EXTRACTOR n={} k={} d={} m={} eps={} status={} seed={}",
        e.n,
        e.k,
        e.d,
        e.m,
        render(&e.epsilon),
        e.status,
        e.seed
    )?;
    let width = (e.m as usize).div_ceil(4).max(1);
    let mut line = String::with_capacity(width << e.d);
    for x in 0..(1u64 << e.n) {
        line.clear();
        for &z in e.row(x) {
            line.push_str(&format!("{z:0width$x}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Reads an extractor table file in either the dense or the `x y -> z` form.
pub fn read_extractor(r: impl BufRead) -> Result<ExtractorInstance, ExtractorError> {
    let perr = |line: usize, msg: &str| ExtractorError::Parse { line, msg: msg.to_string() };
    let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim_start().starts_with('#') || l.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
    let header = header?;
    let rest = header.strip_prefix("EXTRACTOR ").ok_or_else(|| perr(hline, "expected EXTRACTOR header"))?;
    let (mut n, mut k, mut d, mut m, mut eps, mut status, mut seed) = (None, None, None, None, None, None, None);
    for kv in rest.split_whitespace() {
        let (key, v) = kv.split_once('=').ok_or_else(|| perr(hline, "malformed field"))?;
        let num = || v.parse::<u32>().map_err(|_| perr(hline, "non-numeric field"));
        match key {
            "n" => n = Some(num()?),
            "k" => k = Some(num()?),
            "d" => d = Some(num()?),
            "m" => m = Some(num()?),
            "eps" => eps = Some(parse_rational(v).ok_or_else(|| perr(hline, "bad eps"))?),
            "status" => status = Some(v.parse::<Status>().map_err(|e| perr(hline, &e))?),
            "seed" => seed = Some(v.parse::<u64>().map_err(|_| perr(hline, "bad seed"))?),
            _ => return Err(perr(hline, "unknown field")),
        }
    }
    let (Some(n), Some(k), Some(d), Some(m), Some(eps), Some(status), Some(seed)) = (n, k, d, m, eps, status, seed) else {
        return Err(perr(hline, "header needs n, k, d, m, eps, status and seed"));
    };
    ExtractorInstance::check_shape(n, k, d, m, &eps)?;
    let width = (m as usize).div_ceil(4).max(1);
    let entries = 1usize << (n + d);
    let mut table: Vec<Option<u32>> = vec![None; entries];
    let mut dense_row = 0usize;
    for (ln, line) in lines {
        let line = line?;
        let line = line.trim();
        if let Some((lhs, z)) = line.split_once("->") {
            let mut parts = lhs.split_whitespace();
            let (Some(x), Some(y), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(perr(ln, "expected `<x> <y> -> <z>`"));
            };
            let x = usize::from_str_radix(x, 16).map_err(|_| perr(ln, "bad x"))?;
            let y = usize::from_str_radix(y, 16).map_err(|_| perr(ln, "bad y"))?;
            let z = u32::from_str_radix(z.trim(), 16).map_err(|_| perr(ln, "bad z"))?;
            if x >> n != 0 || y >> d != 0 {
                return Err(perr(ln, "x or y out of range"));
            }
            table[(x << d) | y] = Some(z);
        } else {
            if line.len() != width << d || dense_row >> n != 0 {
                return Err(perr(ln, "dense row has the wrong length or there are too many rows"));
            }
            for y in 0..(1usize << d) {
                let z = u32::from_str_radix(&line[y * width..(y + 1) * width], 16).map_err(|_| perr(ln, "bad hex"))?;
                table[(dense_row << d) | y] = Some(z);
            }
            dense_row += 1;
        }
    }
    let table: Vec<u32> = table
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| perr(0, "table is incomplete"))?;
    let mut inst = ExtractorInstance::from_table(n, k, d, m, eps, table)?;
    inst.status = status;
    inst.seed = seed;
    Ok(inst)
}
