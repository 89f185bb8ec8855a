//! Prime splitting and the rich-owner graph construction.
//!
//! Splitting replaces every edge `(x, z)` of a base graph by `t` edges
//! `(x, (z, p_i, x mod p_i))`, one per prime among the first `t`. Two distinct
//! left nodes meet on a split right node only if the prime divides the
//! difference of their integer encodings, which makes almost every split
//! right node owned by a single left node.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::bigraph::{Adjacency, GraphError, LeftNode, LeftRegularGraph, LeftSubset, RightId};
use crate::extractor::{search_extractor, ExtractorError, ExtractorInstance, SearchParams, Status};
use crate::primes::{first_primes, prime_count};
use crate::ratio::{ceil_log2, in_unit_interval, parse_rational, render, Rational};
use crate::rng::derive_seed;

#[derive(Debug, Error)]
pub enum RichOwnerError {
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("input {0:#x} appears more than once")]
    Duplicate(u64),
    #[error("the extractor for k = {k} is unverified; refusing to build")]
    Unverified { k: u32 },
    #[error("{what} = {value} exceeds the calibrated bound {bound}")]
    BoundViolated { what: &'static str, value: u32, bound: String },
    #[error("edge index {j} out of range (degree {degree})")]
    IndexOutOfRange { j: usize, degree: usize },
    #[error(transparent)]
    Extractor(#[from] ExtractorError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The integer encoding of an `n`-bit string: `2^n + value`.
///
/// Distinct strings of the same length map to distinct integers below
/// `2^(n+1)` whose differences are below `2^n`.
#[inline]
pub fn canonical_int(x: u64, n: u32) -> u64 {
    (1u64 << n) + x
}

/// Parameters of the splitting transform.
#[derive(Clone, PartialEq, Eq)]
pub struct SplitParams {
    pub s: u64,
    pub n: u32,
    pub delta: Rational,
    pub t: usize,
    pub primes: Arc<Vec<u64>>,
}

impl fmt::Debug for SplitParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SplitParams(s={} n={} delta={} t={})", self.s, self.n, render(&self.delta), self.t)
    }
}

/// `ceil(s·n/δ)` in wide arithmetic.
pub fn bound_prime_count(s: u64, n: u32, delta: &Rational) -> u128 {
    let num = s as u128 * n.max(1) as u128 * *delta.denom() as u128;
    num.div_ceil(*delta.numer() as u128).max(1)
}

impl SplitParams {
    /// `t = ceil(s·n/δ)` primes.
    pub fn new(s: u64, n: u32, delta: Rational) -> Result<Self, RichOwnerError> {
        let t = bound_prime_count(s, n, &delta);
        let t = usize::try_from(t)
            .ok()
            .filter(|&t| t <= 1 << 26)
            .ok_or_else(|| RichOwnerError::Parameter(format!("{t} primes is beyond desk scale")))?;
        Self::with_prime_count(s, n, delta, t)
    }

    /// An explicit prime count (used by the builder's separation cap).
    pub fn with_prime_count(s: u64, n: u32, delta: Rational, t: usize) -> Result<Self, RichOwnerError> {
        if s == 0 {
            return Err(RichOwnerError::Parameter("s must be at least 1".into()));
        }
        if !in_unit_interval(&delta) {
            return Err(RichOwnerError::Parameter(format!("delta {} outside (0, 1]", render(&delta))));
        }
        if t == 0 || n > 62 {
            return Err(RichOwnerError::Parameter("need t ≥ 1 and n ≤ 62".into()));
        }
        Ok(SplitParams { s, n, delta, t, primes: Arc::new(first_primes(t)) })
    }

    /// The largest prime `p_t`.
    pub fn p_t(&self) -> u64 {
        *self.primes.last().expect("t ≥ 1")
    }

    pub fn block(&self) -> u64 {
        self.p_t() * self.p_t()
    }

    pub fn encode(&self, id: &SplitRightId) -> RightId {
        let i = self.primes.binary_search(&id.p).expect("p is one of the first t primes");
        id.z * self.block() + i as u64 * self.p_t() + id.residue
    }

    pub fn decode(&self, id: RightId) -> SplitRightId {
        let (z, rest) = (id / self.block(), id % self.block());
        let (i, residue) = ((rest / self.p_t()) as usize, rest % self.p_t());
        SplitRightId { z, p: self.primes[i], residue }
    }
}

/// A right node of a split graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitRightId {
    pub z: RightId,
    pub p: u64,
    pub residue: u64,
}

/// Fraction of the primes `p` for which `xs[i] mod p` equals `xs[j] mod p`
/// for some `j ≠ i` (strings read through [`canonical_int`]).
pub fn collision_fraction(xs: &[u64], i: usize, params: &SplitParams) -> Result<Rational, RichOwnerError> {
    if xs.len() as u64 > params.s {
        return Err(RichOwnerError::Parameter(format!("{} inputs, more than s = {}", xs.len(), params.s)));
    }
    if i >= xs.len() {
        return Err(RichOwnerError::Parameter(format!("index {i} out of range")));
    }
    if let Some(&x) = xs.iter().find(|&&x| x >> params.n != 0) {
        return Err(RichOwnerError::Graph(GraphError::BitLength { x, n: params.n }));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(RichOwnerError::Duplicate(w[0]));
    }
    let xi = canonical_int(xs[i], params.n);
    let hits = params
        .primes
        .iter()
        .filter(|&&p| {
            xs.iter()
                .enumerate()
                .any(|(j, &x)| j != i && canonical_int(x, params.n) % p == xi % p)
        })
        .count();
    Ok(Rational::new(hits as u64, params.t as u64))
}

struct SplitAdjacency {
    base: LeftRegularGraph,
    params: SplitParams,
    /// Number of primes below `2^n`; larger primes never collide.
    small: usize,
}

impl SplitAdjacency {
    /// Base neighbor lists of `b`, grouped by base right node:
    /// `(z, position in b)` sorted, one entry per base edge slot.
    fn grouped(&self, b: &[LeftNode]) -> Vec<(RightId, u32)> {
        let mut pairs = Vec::with_capacity(b.len() * self.base.degree());
        for (pos, &x) in b.iter().enumerate() {
            for j in 0..self.base.degree() {
                pairs.push((self.base.neighbor_unchecked(x, j), pos as u32));
            }
        }
        pairs.sort_unstable();
        pairs
    }

    /// Calls `f(z, prime index, residue, class)` for every split right node
    /// with at least `s` distinct neighbors in `b`; `class` lists those
    /// neighbors as `(position in b, number of base edge slots to z)`.
    fn for_each_shared(&self, b: &[LeftNode], s: usize, mut f: impl FnMut(RightId, usize, u64, &[(u32, usize)])) {
        let pairs = self.grouped(b);
        let n = self.params.n;
        let mut members: Vec<(u32, usize)> = Vec::new();
        let mut keyed: Vec<(u64, u32, usize)> = Vec::new();
        let mut class: Vec<(u32, usize)> = Vec::new();
        let mut start = 0;
        while start < pairs.len() {
            let z = pairs[start].0;
            let mut end = start;
            members.clear();
            while end < pairs.len() && pairs[end].0 == z {
                match members.last_mut() {
                    Some((pos, mult)) if *pos == pairs[end].1 => *mult += 1,
                    _ => members.push((pairs[end].1, 1)),
                }
                end += 1;
            }
            if members.len() >= s {
                for i in 0..self.small {
                    let p = self.params.primes[i];
                    keyed.clear();
                    keyed.extend(members.iter().map(|&(m, mult)| (canonical_int(b[m as usize], n) % p, m, mult)));
                    keyed.sort_unstable();
                    let mut a = 0;
                    while a < keyed.len() {
                        let mut e = a;
                        while e < keyed.len() && keyed[e].0 == keyed[a].0 {
                            e += 1;
                        }
                        if e - a >= s {
                            class.clear();
                            class.extend(keyed[a..e].iter().map(|&(_, m, mult)| (m, mult)));
                            f(z, i, keyed[a].0, &class);
                        }
                        a = e;
                    }
                }
            }
            start = end;
        }
    }
}

impl Adjacency for SplitAdjacency {
    #[inline]
    fn neighbor(&self, x: LeftNode, j: usize) -> RightId {
        let t = self.params.t;
        let (base_j, i) = (j / t, j % t);
        let z = self.base.neighbor_unchecked(x, base_j);
        let p_t = self.params.p_t();
        z * p_t * p_t + i as u64 * p_t + canonical_int(x, self.params.n) % self.params.primes[i]
    }

    fn slots_on_shared(&self, b: &[LeftNode], s: usize) -> Option<Vec<usize>> {
        let degree = self.base.degree() * self.params.t;
        if s <= 1 {
            return Some(vec![degree; b.len()]);
        }
        let mut slots = vec![0usize; b.len()];
        self.for_each_shared(b, s, |_, _, _, class| {
            // each base edge slot of a class member to z contributes one split slot
            for &(m, mult) in class {
                slots[m as usize] += mult;
            }
        });
        Some(slots)
    }

    fn shared_right(&self, b: &[LeftNode], s: usize) -> Option<Vec<RightId>> {
        if s <= 1 {
            return None;
        }
        let mut ids = Vec::new();
        let p_t = self.params.p_t();
        self.for_each_shared(b, s, |z, i, r, _| ids.push(z * p_t * p_t + i as u64 * p_t + r));
        ids.sort_unstable();
        Some(ids)
    }
}

/// The split graph `H`: left degree `t` times that of `g`, right size
/// `right_size(g) · p_t²`.
pub fn split_graph(g: &LeftRegularGraph, params: &SplitParams) -> Result<LeftRegularGraph, RichOwnerError> {
    if params.n != g.n() {
        return Err(RichOwnerError::Parameter(format!("split parameters for n = {}, graph has n = {}", params.n, g.n())));
    }
    let degree = g
        .degree()
        .checked_mul(params.t)
        .ok_or_else(|| RichOwnerError::Parameter("split degree overflows".into()))?;
    let right_size = g
        .right_size()
        .checked_mul(params.block())
        .ok_or_else(|| RichOwnerError::Parameter("split right set overflows".into()))?;
    let small = if params.n >= 40 { params.t } else { params.primes.partition_point(|&p| p < 1u64 << params.n) };
    let adjacency = SplitAdjacency { base: g.clone(), params: params.clone(), small };
    let label = format!("split({}, s={}, delta={}, t={})", g.label(), params.s, render(&params.delta), params.t);
    let h = LeftRegularGraph::with_adjacency(g.n(), degree, right_size, label, Arc::new(adjacency))?;
    Ok(match g.domain() {
        Some(d) => h.restrict(d)?,
        None => h,
    })
}

/// Supplies verified extractors to the builder.
pub trait ExtractorSource: Send + Sync {
    fn extractor(&self, n: u32, k: u32, epsilon: Rational) -> Result<ExtractorInstance, ExtractorError>;
}

/// Randomized search with per-parameter derived seeds and a cache.
pub struct SearchSource {
    pub seed: u64,
    pub a_d: u32,
    pub a_m: u32,
    pub retries: u32,
    pub exact_budget: u64,
    pub sampled_trials: Option<u64>,
    cache: Mutex<BTreeMap<(u32, u32, u64, u64), ExtractorInstance>>,
}

impl SearchSource {
    pub fn new(seed: u64) -> Self {
        SearchSource {
            seed,
            a_d: 2,
            a_m: 2,
            retries: 16,
            exact_budget: crate::extractor::DEFAULT_EXACT_BUDGET,
            sampled_trials: Some(256),
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn params(&self, n: u32, k: u32, epsilon: Rational) -> SearchParams {
        SearchParams {
            a_d: self.a_d,
            a_m: self.a_m,
            retries: self.retries,
            exact_budget: self.exact_budget,
            sampled_trials: self.sampled_trials,
            ..SearchParams::new(n, k, epsilon)
        }
    }

    pub fn seed_for(&self, n: u32, k: u32, epsilon: &Rational) -> u64 {
        derive_seed(self.seed, &[n as u64, k as u64, *epsilon.numer(), *epsilon.denom()])
    }
}

impl ExtractorSource for SearchSource {
    fn extractor(&self, n: u32, k: u32, epsilon: Rational) -> Result<ExtractorInstance, ExtractorError> {
        let key = (n, k, *epsilon.numer(), *epsilon.denom());
        if let Some(e) = self.cache.lock().unwrap().get(&key) {
            return Ok(e.clone());
        }
        let e = search_extractor(&self.params(n, k, epsilon), self.seed_for(n, k, &epsilon))?;
        self.cache.lock().unwrap().insert(key, e.clone());
        Ok(e)
    }
}

/// Always hands out the same instance (checked against the request).
pub struct FixedSource(pub ExtractorInstance);

impl ExtractorSource for FixedSource {
    fn extractor(&self, n: u32, k: u32, epsilon: Rational) -> Result<ExtractorInstance, ExtractorError> {
        let e = &self.0;
        if (e.n, e.k, e.epsilon) != (n, k, epsilon) {
            return Err(ExtractorError::Parameter(format!(
                "fixed extractor has (n, k, eps) = ({}, {}, {}), requested ({n}, {k}, {})",
                e.n,
                e.k,
                render(&e.epsilon),
                render(&epsilon)
            )));
        }
        Ok(e.clone())
    }
}

/// Builder constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub k_d: u32,
    pub k_m: u32,
    /// Cap the prime count at the separation bound (see [`separation_prime_count`]).
    pub separation_cap: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { k_d: 6, k_m: 6, separation_cap: true }
    }
}

/// The least `t` with `π(2^n − 1) / t < ε`.
///
/// Two distinct `n`-bit strings differ by less than `2^n` under
/// [`canonical_int`], so only primes below `2^n` can put them in the same
/// residue class. With this many primes every left node has fewer than an
/// `ε` fraction of split edges on shared right nodes, whatever the base graph.
pub fn separation_prime_count(n: u32, epsilon: &Rational) -> u64 {
    let pi = prime_count((1u64 << n) - 1) as u64;
    pi * *epsilon.denom() / *epsilon.numer() + 1
}

/// A built graph together with every parameter that produced it.
#[derive(Clone)]
pub struct RichOwnerGraph {
    pub graph: LeftRegularGraph,
    pub n: u32,
    pub ell: u32,
    pub c: u32,
    pub delta: Rational,
    pub epsilon: Rational,
    /// Extractor min-entropy (`ell − c`, clamped to `n`).
    pub k: u32,
    /// Average-degree bound `a` and share threshold `s = ceil(a/ε)`.
    pub a: u64,
    pub s: u64,
    pub t_bound: u128,
    pub t_sep: u64,
    pub split: SplitParams,
    pub extractor: ExtractorInstance,
    pub d_out: u32,
    pub m_out: u32,
}

impl fmt::Debug for RichOwnerGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RichOwnerGraph(n={} ell={} c={} delta={} k={} s={} t={} d_out={} m_out={})",
            self.n,
            self.ell,
            self.c,
            render(&self.delta),
            self.k,
            self.s,
            self.split.t,
            self.d_out,
            self.m_out
        )
    }
}

/// `c + log2(n/δ)`, the unit in which output lengths are measured.
pub fn length_unit(n: u32, c: u32, delta: &Rational) -> f64 {
    c as f64 + (n.max(1) as f64 * *delta.denom() as f64 / *delta.numer() as f64).log2()
}

/// Builds a graph with the rich owner property for `(ell, c, delta)`.
///
/// `ε = δ/4`, `k = ell − c`, `a = 2^c · 2^(entropy loss)`, and the extractor
/// graph is split with share threshold `s = ceil(a/ε)` and `δ_split = ε`.
pub fn build_rich_owner(
    n: u32,
    ell: u32,
    c: u32,
    delta: Rational,
    source: &dyn ExtractorSource,
    opts: &BuildOptions,
) -> Result<RichOwnerGraph, RichOwnerError> {
    if ell <= c {
        return Err(RichOwnerError::Parameter(format!("need ell > c, got ell = {ell}, c = {c}")));
    }
    if !in_unit_interval(&delta) {
        return Err(RichOwnerError::Parameter(format!("delta {} outside (0, 1]", render(&delta))));
    }
    if n == 0 || n > 24 {
        return Err(RichOwnerError::Parameter(format!("n = {n} outside 1..=24")));
    }
    let epsilon = delta / 4;
    // for ell − c > n every subset of {0,1}^n already has at most 2^(ell−c) members
    let k = (ell - c).min(n);
    let extractor = source.extractor(n, k, epsilon)?;
    if extractor.status == Status::Unverified {
        return Err(RichOwnerError::Unverified { k });
    }
    let loss = extractor.entropy_loss();
    if c + loss >= 63 {
        return Err(RichOwnerError::Parameter("average-degree bound overflows".into()));
    }
    let a = 1u64 << (c + loss);
    let s = (Rational::from_integer(a) / epsilon).ceil().to_integer();
    let t_bound = bound_prime_count(s, n, &epsilon);
    let t_sep = separation_prime_count(n, &epsilon);
    let t_raw = if opts.separation_cap { t_bound.min(t_sep as u128) } else { t_bound };
    let t = usize::try_from(t_raw)
        .ok()
        .and_then(|t| t.checked_next_power_of_two())
        .filter(|&t| t <= 1 << 22)
        .ok_or_else(|| RichOwnerError::Parameter(format!("{t_raw} primes is beyond desk scale")))?;
    let split = SplitParams::with_prime_count(s, n, epsilon, t)?;
    let graph = split_graph(&extractor.graph(), &split)?;
    let d_out = graph.d().expect("power-of-two degree");
    let m_out = ceil_log2(graph.right_size());
    let unit = length_unit(n, c, &delta);
    if d_out as f64 > opts.k_d as f64 * unit {
        return Err(RichOwnerError::BoundViolated { what: "d_out", value: d_out, bound: format!("{:.3}", opts.k_d as f64 * unit) });
    }
    if m_out as f64 > ell as f64 + opts.k_m as f64 * unit {
        return Err(RichOwnerError::BoundViolated {
            what: "m_out",
            value: m_out,
            bound: format!("{:.3}", ell as f64 + opts.k_m as f64 * unit),
        });
    }
    Ok(RichOwnerGraph {
        graph,
        n,
        ell,
        c,
        delta,
        epsilon,
        k,
        a,
        s,
        t_bound,
        t_sep,
        split,
        extractor,
        d_out,
        m_out,
    })
}

impl RichOwnerGraph {
    /// The `j`-th neighbor of `x`; `j = base·t + prime_index`.
    pub fn neighbor_at(&self, x: LeftNode, j: usize) -> Result<RightId, RichOwnerError> {
        if j >= self.graph.degree() {
            return Err(RichOwnerError::IndexOutOfRange { j, degree: self.graph.degree() });
        }
        Ok(self.graph.neighbor(x, j)?)
    }

    /// `(base edge index, prime index)` of slot `j`.
    pub fn decompose(&self, j: usize) -> (usize, usize) {
        (j / self.split.t, j % self.split.t)
    }

    pub fn decode(&self, id: RightId) -> SplitRightId {
        self.split.decode(id)
    }

    /// Achieved `d_out / (c + log2(n/δ))`.
    pub fn d_ratio(&self) -> f64 {
        self.d_out as f64 / length_unit(self.n, self.c, &self.delta)
    }

    /// Achieved `(m_out − ell) / (c + log2(n/δ))`.
    pub fn m_ratio(&self) -> f64 {
        (self.m_out as f64 - self.ell as f64) / length_unit(self.n, self.c, &self.delta)
    }

    pub fn manifest(&self) -> Manifest {
        Manifest {
            n: self.n,
            ell: self.ell,
            c: self.c,
            delta: self.delta,
            epsilon: self.epsilon,
            k: self.k,
            s: self.s,
            t: self.split.t,
            d_out: self.d_out,
            m_out: self.m_out,
            extractor_seed: self.extractor.seed,
            extractor_d: self.extractor.d,
            extractor_m: self.extractor.m,
            extractor_status: self.extractor.status.to_string(),
            extra: Vec::new(),
        }
    }
}

/// The build manifest: enough to regenerate the graph bit-for-bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub n: u32,
    pub ell: u32,
    pub c: u32,
    pub delta: Rational,
    pub epsilon: Rational,
    pub k: u32,
    pub s: u64,
    pub t: usize,
    pub d_out: u32,
    pub m_out: u32,
    pub extractor_seed: u64,
    pub extractor_d: u32,
    pub extractor_m: u32,
    pub extractor_status: String,
    /// Trailing `key=value` fields appended by the harness.
    pub extra: Vec<(String, String)>,
}

impl Manifest {
    pub fn write(&self, mut w: impl Write) -> Result<(), RichOwnerError> {
        write!(
            w,
            "RICHOWNER n={} ell={} c={} delta={} eps={} k={} s={} t={} d_out={} m_out={} extractor_seed={} extractor_d={} extractor_m={} extractor_status={}",
            self.n,
            self.ell,
            self.c,
            render(&self.delta),
            render(&self.epsilon),
            self.k,
            self.s,
            self.t,
            self.d_out,
            self.m_out,
            self.extractor_seed,
            self.extractor_d,
            self.extractor_m,
            self.extractor_status
        )?;
        for (k, v) in &self.extra {
            write!(w, " {k}={v}")?;
        }
        writeln!(w)?;
        Ok(())
    }

    pub fn read(r: impl BufRead) -> Result<Manifest, RichOwnerError> {
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Self::parse_line(line).map_err(|msg| RichOwnerError::Parse { line: i + 1, msg });
        }
        Err(RichOwnerError::Parse { line: 0, msg: "no RICHOWNER line".into() })
    }

    fn parse_line(line: &str) -> Result<Manifest, String> {
        let rest = line.strip_prefix("RICHOWNER ").ok_or("expected RICHOWNER header")?;
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        let mut extra = Vec::new();
        const KNOWN: [&str; 14] = [
            "n", "ell", "c", "delta", "eps", "k", "s", "t", "d_out", "m_out", "extractor_seed", "extractor_d", "extractor_m",
            "extractor_status",
        ];
        for kv in rest.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| format!("malformed field {kv:?}"))?;
            if KNOWN.contains(&k) {
                fields.insert(k, v);
            } else {
                extra.push((k.to_string(), v.to_string()));
            }
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| format!("missing {k}"));
        fn num<T: std::str::FromStr>(v: &str, k: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad {k}"))
        }
        Ok(Manifest {
            n: num(get("n")?, "n")?,
            ell: num(get("ell")?, "ell")?,
            c: num(get("c")?, "c")?,
            delta: parse_rational(get("delta")?).ok_or("bad delta")?,
            epsilon: parse_rational(get("eps")?).ok_or("bad eps")?,
            k: num(get("k")?, "k")?,
            s: num(get("s")?, "s")?,
            t: num(get("t")?, "t")?,
            d_out: num(get("d_out")?, "d_out")?,
            m_out: num(get("m_out")?, "m_out")?,
            extractor_seed: num(get("extractor_seed")?, "extractor_seed")?,
            extractor_d: num(get("extractor_d")?, "extractor_d")?,
            extractor_m: num(get("extractor_m")?, "extractor_m")?,
            extractor_status: get("extractor_status")?.to_string(),
            extra,
        })
    }

    /// Regenerates the graph from the recorded extractor seed and lengths.
    pub fn rebuild(&self) -> Result<RichOwnerGraph, RichOwnerError> {
        let mut e = ExtractorInstance::random(self.n, self.k, self.extractor_d, self.extractor_m, self.epsilon, self.extractor_seed)?;
        e.status = self.extractor_status.parse().map_err(RichOwnerError::Parameter)?;
        let g = build_rich_owner(
            self.n,
            self.ell,
            self.c,
            self.delta,
            &FixedSource(e),
            &BuildOptions { k_d: u32::MAX, k_m: u32::MAX, separation_cap: true },
        )?;
        if g.split.t != self.t || g.s != self.s {
            return Err(RichOwnerError::Parameter("manifest does not match the regenerated graph".into()));
        }
        Ok(g)
    }
}

/// Members of `b` that are not `(2, δ)`-rich in the built graph.
pub fn non_rich_in(g: &RichOwnerGraph, b: &LeftSubset, delta: &Rational) -> Result<Vec<LeftNode>, RichOwnerError> {
    Ok(crate::bigraph::non_rich_members(&g.graph, b, 2, delta)?)
}
