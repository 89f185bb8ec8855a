//! Finite left-regular bipartite graphs and exact sharing/richness statistics.
//!
//! Left nodes are the integers `0..2^n` read as `n`-bit strings, so numeric
//! order is the lexicographic order of the strings. Right nodes are dense ids
//! in `0..right_size`. A graph is a neighbor oracle: edge slot `j` of left node
//! `x` lands on `neighbor(x, j)`. Parallel edges are allowed and count with
//! multiplicity wherever a *fraction of neighbors* is taken; the number of left
//! neighbors of a right node always counts distinct left nodes.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::ratio::{in_unit_interval, render, Rational};

pub type LeftNode = u64;
pub type RightId = u64;

/// Materialized adjacency files are limited to this many edges.
pub const MAX_MATERIALIZED_EDGES: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("left node {x:#x} is not a {n}-bit string")]
    BitLength { x: LeftNode, n: u32 },
    #[error("left node {0:#x} is not in the graph's left set")]
    NotInDomain(LeftNode),
    #[error("subset is over {found}-bit strings, graph has n = {expected}")]
    LengthMismatch { expected: u32, found: u32 },
    #[error("restriction to an empty left set")]
    EmptyRestriction,
    #[error("delta must lie in (0, 1], got {0}")]
    InvalidDelta(String),
    #[error("share threshold must be at least 1")]
    InvalidShare,
    #[error("subset of size {size} exceeds 2^{ell}")]
    SizeViolation { size: usize, ell: u32 },
    #[error("right id {id} out of range (right_size = {right_size})")]
    RightOutOfRange { id: RightId, right_size: u64 },
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("graph has {edges} edges, more than the materialization limit")]
    TooLarge { edges: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Neighbor oracle behind a [`LeftRegularGraph`].
///
/// Implementations with extra structure may answer the sharing queries
/// directly; the defaults fall back to edge enumeration.
pub trait Adjacency: Send + Sync {
    fn neighbor(&self, x: LeftNode, j: usize) -> RightId;

    /// For each member of `b` (same order), the number of its edge slots that
    /// land on right nodes with at least `s` distinct neighbors in `b`.
    fn slots_on_shared(&self, _b: &[LeftNode], _s: usize) -> Option<Vec<usize>> {
        None
    }

    /// All right ids with at least `s` distinct neighbors in `b`, ascending.
    fn shared_right(&self, _b: &[LeftNode], _s: usize) -> Option<Vec<RightId>> {
        None
    }
}

struct TableAdjacency {
    degree: usize,
    table: Vec<RightId>,
}

impl Adjacency for TableAdjacency {
    fn neighbor(&self, x: LeftNode, j: usize) -> RightId {
        self.table[x as usize * self.degree + j]
    }
}

struct SparseTableAdjacency {
    degree: usize,
    rows: HashMap<LeftNode, usize>,
    table: Vec<RightId>,
}

impl Adjacency for SparseTableAdjacency {
    fn neighbor(&self, x: LeftNode, j: usize) -> RightId {
        self.table[self.rows[&x] * self.degree + j]
    }
}

struct FnAdjacency<F>(F);

impl<F> Adjacency for FnAdjacency<F>
where
    F: Fn(LeftNode, usize) -> RightId + Send + Sync,
{
    fn neighbor(&self, x: LeftNode, j: usize) -> RightId {
        (self.0)(x, j)
    }
}

/// A bipartite graph whose left nodes all have the same number of edge slots.
#[derive(Clone)]
pub struct LeftRegularGraph {
    n: u32,
    degree: usize,
    right_size: u64,
    label: String,
    adjacency: Arc<dyn Adjacency>,
    domain: Option<Arc<LeftSubset>>,
}

impl fmt::Debug for LeftRegularGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LeftRegularGraph")
            .field("n", &self.n)
            .field("degree", &self.degree)
            .field("right_size", &self.right_size)
            .field("label", &self.label)
            .field("restricted", &self.domain.as_ref().map(|d| d.len()))
            .finish()
    }
}

impl LeftRegularGraph {
    pub fn with_adjacency(
        n: u32,
        degree: usize,
        right_size: u64,
        label: impl Into<String>,
        adjacency: Arc<dyn Adjacency>,
    ) -> Result<Self, GraphError> {
        assert!(n <= 32, "left nodes are at most 32-bit strings");
        if degree == 0 {
            return Err(GraphError::ZeroDegree);
        }
        Ok(LeftRegularGraph { n, degree, right_size, label: label.into(), adjacency, domain: None })
    }

    pub fn from_fn<F>(n: u32, degree: usize, right_size: u64, label: impl Into<String>, f: F) -> Result<Self, GraphError>
    where
        F: Fn(LeftNode, usize) -> RightId + Send + Sync + 'static,
    {
        Self::with_adjacency(n, degree, right_size, label, Arc::new(FnAdjacency(f)))
    }

    /// A graph over all of `{0,1}^n` from a row-major table (`2^n * degree` entries).
    pub fn from_table(
        n: u32,
        degree: usize,
        right_size: u64,
        label: impl Into<String>,
        table: Vec<RightId>,
    ) -> Result<Self, GraphError> {
        assert_eq!(table.len() as u64, (1u64 << n) * degree as u64, "table size");
        if let Some(&id) = table.iter().find(|&&id| id >= right_size) {
            return Err(GraphError::RightOutOfRange { id, right_size });
        }
        Self::with_adjacency(n, degree, right_size, label, Arc::new(TableAdjacency { degree, table }))
    }

    /// `neighbor(x, 0) = x`, degree 1.
    pub fn identity(n: u32) -> Self {
        Self::from_fn(n, 1, 1u64 << n, "identity", |x, _| x).unwrap()
    }

    /// Every edge goes to right node 0.
    pub fn constant(n: u32, d: u32) -> Self {
        Self::from_fn(n, 1usize << d, 1, "constant", |_, _| 0).unwrap()
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `log2(degree)` when the degree is a power of two.
    pub fn d(&self) -> Option<u32> {
        self.degree.is_power_of_two().then(|| self.degree.trailing_zeros())
    }

    pub fn right_size(&self) -> u64 {
        self.right_size
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn adjacency(&self) -> &Arc<dyn Adjacency> {
        &self.adjacency
    }

    /// The restricted left set, if any.
    pub fn domain(&self) -> Option<&LeftSubset> {
        self.domain.as_deref()
    }

    pub fn left_count(&self) -> u64 {
        self.domain.as_ref().map_or(1u64 << self.n, |d| d.len() as u64)
    }

    /// Left nodes in lexicographic order.
    pub fn left_nodes(&self) -> Box<dyn Iterator<Item = LeftNode> + '_> {
        match &self.domain {
            Some(d) => Box::new(d.iter()),
            None => Box::new(0..(1u64 << self.n)),
        }
    }

    pub fn contains_left(&self, x: LeftNode) -> bool {
        x >> self.n == 0 && self.domain.as_ref().is_none_or(|d| d.contains(x))
    }

    fn check_left(&self, x: LeftNode) -> Result<(), GraphError> {
        if x >> self.n != 0 {
            return Err(GraphError::BitLength { x, n: self.n });
        }
        if !self.contains_left(x) {
            return Err(GraphError::NotInDomain(x));
        }
        Ok(())
    }

    /// Edge slot `j` of `x`, without range checks.
    #[inline]
    pub fn neighbor_unchecked(&self, x: LeftNode, j: usize) -> RightId {
        self.adjacency.neighbor(x, j)
    }

    pub fn neighbor(&self, x: LeftNode, j: usize) -> Result<RightId, GraphError> {
        self.check_left(x)?;
        assert!(j < self.degree, "edge index {j} out of range (degree {})", self.degree);
        Ok(self.adjacency.neighbor(x, j))
    }

    /// The ordered list of right ids of `x`, one per edge slot.
    pub fn neighbors(&self, x: LeftNode) -> Result<Vec<RightId>, GraphError> {
        self.check_left(x)?;
        Ok((0..self.degree).map(|j| self.adjacency.neighbor(x, j)).collect())
    }

    fn check_subset(&self, b: &LeftSubset) -> Result<(), GraphError> {
        if b.n != self.n {
            return Err(GraphError::LengthMismatch { expected: self.n, found: b.n });
        }
        if let Some(x) = b.iter().find(|&x| !self.contains_left(x)) {
            return Err(GraphError::NotInDomain(x));
        }
        Ok(())
    }

    /// The subgraph of all edges leaving `lp`.
    pub fn restrict(&self, lp: &LeftSubset) -> Result<LeftRegularGraph, GraphError> {
        if lp.is_empty() {
            return Err(GraphError::EmptyRestriction);
        }
        self.check_subset(lp)?;
        let mut g = self.clone();
        g.domain = Some(Arc::new(lp.clone()));
        g.label = format!("{}|restricted", self.label);
        Ok(g)
    }
}

/// A finite set of `n`-bit left nodes, iterated in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftSubset {
    n: u32,
    members: BTreeSet<LeftNode>,
}

impl LeftSubset {
    pub fn new(n: u32, members: impl IntoIterator<Item = LeftNode>) -> Result<Self, GraphError> {
        let members: BTreeSet<LeftNode> = members.into_iter().collect();
        if let Some(&x) = members.iter().find(|&&x| x >> n != 0) {
            return Err(GraphError::BitLength { x, n });
        }
        Ok(LeftSubset { n, members })
    }

    pub fn empty(n: u32) -> Self {
        LeftSubset { n, members: BTreeSet::new() }
    }

    pub fn full(n: u32) -> Self {
        LeftSubset { n, members: (0..(1u64 << n)).collect() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: LeftNode) -> bool {
        self.members.contains(&x)
    }

    pub fn iter(&self) -> impl Iterator<Item = LeftNode> + '_ {
        self.members.iter().copied()
    }

    pub fn members(&self) -> &BTreeSet<LeftNode> {
        &self.members
    }

    pub fn intersection(&self, other: &LeftSubset) -> LeftSubset {
        LeftSubset { n: self.n, members: self.members.intersection(&other.members).copied().collect() }
    }

    pub fn is_subset(&self, other: &LeftSubset) -> bool {
        self.members.is_subset(&other.members)
    }
}

/// Outcome of [`rich_nodes`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RichnessReport {
    pub s: usize,
    pub delta: Rational,
    pub rich: BTreeSet<LeftNode>,
    pub non_rich: BTreeSet<LeftNode>,
    pub s_shared_right: BTreeSet<RightId>,
}

/// Reference computation: for each member of `b`, edge slots landing on
/// right nodes with `≥ s` distinct neighbors in `b`. Enumerates every edge.
pub fn slots_on_shared_reference(g: &LeftRegularGraph, b: &[LeftNode], s: usize) -> Vec<usize> {
    let counts = distinct_neighbor_counts(g, b);
    b.iter()
        .map(|&x| {
            (0..g.degree)
                .filter(|&j| counts[&g.neighbor_unchecked(x, j)] >= s)
                .count()
        })
        .collect()
}

fn distinct_neighbor_counts(g: &LeftRegularGraph, b: &[LeftNode]) -> HashMap<RightId, usize> {
    let mut counts: HashMap<RightId, usize> = HashMap::new();
    let mut row = Vec::with_capacity(g.degree);
    for &x in b {
        row.clear();
        row.extend((0..g.degree).map(|j| g.neighbor_unchecked(x, j)));
        row.sort_unstable();
        row.dedup();
        for &z in &row {
            *counts.entry(z).or_insert(0) += 1;
        }
    }
    counts
}

/// Per-member count of edge slots on `s`-shared right nodes, using the
/// adjacency's structured answer when it has one.
pub fn slots_on_shared(g: &LeftRegularGraph, b: &LeftSubset, s: usize) -> Result<Vec<usize>, GraphError> {
    if s == 0 {
        return Err(GraphError::InvalidShare);
    }
    g.check_subset(b)?;
    let members: Vec<LeftNode> = b.iter().collect();
    Ok(g
        .adjacency
        .slots_on_shared(&members, s)
        .unwrap_or_else(|| slots_on_shared_reference(g, &members, s)))
}

/// Right ids with at least `s` distinct left neighbors in `b`.
pub fn s_shared_right(g: &LeftRegularGraph, b: &LeftSubset, s: usize) -> Result<BTreeSet<RightId>, GraphError> {
    if s == 0 {
        return Err(GraphError::InvalidShare);
    }
    g.check_subset(b)?;
    let members: Vec<LeftNode> = b.iter().collect();
    if let Some(ids) = g.adjacency.shared_right(&members, s) {
        return Ok(ids.into_iter().collect());
    }
    Ok(distinct_neighbor_counts(g, &members)
        .into_iter()
        .filter(|&(_, c)| c >= s)
        .map(|(z, _)| z)
        .collect())
}

#[inline]
fn within_fraction(count: usize, degree: usize, delta: &Rational) -> bool {
    (count as u128) * (*delta.denom() as u128) <= (*delta.numer() as u128) * (degree as u128)
}

fn check_delta(delta: &Rational) -> Result<(), GraphError> {
    if in_unit_interval(delta) {
        Ok(())
    } else {
        Err(GraphError::InvalidDelta(render(delta)))
    }
}

/// Members of `b` that are `(s, delta)`-rich: at most a `delta` fraction of
/// their edge slots land on `s`-shared right nodes.
pub fn rich_nodes(g: &LeftRegularGraph, b: &LeftSubset, s: usize, delta: &Rational) -> Result<RichnessReport, GraphError> {
    check_delta(delta)?;
    let counts = slots_on_shared(g, b, s)?;
    let mut rich = BTreeSet::new();
    let mut non_rich = BTreeSet::new();
    for (x, c) in b.iter().zip(counts) {
        if within_fraction(c, g.degree, delta) {
            rich.insert(x);
        } else {
            non_rich.insert(x);
        }
    }
    Ok(RichnessReport { s, delta: *delta, rich, non_rich, s_shared_right: s_shared_right(g, b, s)? })
}

/// Members of `b` that are not `(s, delta)`-rich, without materializing the
/// shared right set.
pub fn non_rich_members(g: &LeftRegularGraph, b: &LeftSubset, s: usize, delta: &Rational) -> Result<Vec<LeftNode>, GraphError> {
    check_delta(delta)?;
    let counts = slots_on_shared(g, b, s)?;
    Ok(b.iter()
        .zip(counts)
        .filter(|&(_, c)| !within_fraction(c, g.degree, delta))
        .map(|(x, _)| x)
        .collect())
}

/// One line of a rich-owner audit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RichOwnerAudit {
    pub size: usize,
    pub non_rich: usize,
    /// `floor(2^(ell - c))`; zero when `c > ell`.
    pub allowed: u64,
    pub pass: bool,
}

/// Audits the rich owner property for `(ell, c, delta)` on each supplied set.
pub fn check_rich_owner(
    g: &LeftRegularGraph,
    ell: u32,
    c: u32,
    delta: &Rational,
    family: &[LeftSubset],
) -> Result<Vec<RichOwnerAudit>, GraphError> {
    let allowed = if c > ell { 0 } else { 1u64 << (ell - c) };
    family
        .iter()
        .map(|b| {
            if ell < 64 && b.len() as u64 > 1u64 << ell {
                return Err(GraphError::SizeViolation { size: b.len(), ell });
            }
            let non_rich = non_rich_members(g, b, 2, delta)?.len();
            Ok(RichOwnerAudit { size: b.len(), non_rich, allowed, pass: non_rich as u64 <= allowed })
        })
        .collect()
}

/// Writes the adjacency text format.
pub fn write_adjacency(g: &LeftRegularGraph, mut w: impl Write) -> Result<(), GraphError> {
    let edges = g.left_count() * g.degree as u64;
    if edges > MAX_MATERIALIZED_EDGES {
        return Err(GraphError::TooLarge { edges });
    }
    match g.d() {
        Some(d) => writeln!(w, "BIGRAPH n={} d={} M={} label={}", g.n, d, g.right_size, g.label)?,
        None => writeln!(w, "BIGRAPH n={} D={} M={} label={}", g.n, g.degree, g.right_size, g.label)?,
    }
    for x in g.left_nodes() {
        let row: Vec<String> = (0..g.degree).map(|j| g.neighbor_unchecked(x, j).to_string()).collect();
        writeln!(w, "{:x}: {}", x, row.join(","))?;
    }
    Ok(())
}

/// Reads the adjacency text format. Fewer than `2^n` rows yield a graph
/// restricted to the listed left nodes.
pub fn read_adjacency(r: impl BufRead) -> Result<LeftRegularGraph, GraphError> {
    let perr = |line: usize, msg: &str| GraphError::Parse { line, msg: msg.to_string() };
    let mut lines = r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim_start().starts_with('#') || l.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
    let header = header?;
    let rest = header.strip_prefix("BIGRAPH ").ok_or_else(|| perr(hline, "expected BIGRAPH header"))?;
    let (fields, label) = match rest.split_once(" label=") {
        Some((f, l)) => (f, l.to_string()),
        None => return Err(perr(hline, "missing label")),
    };
    let (mut n, mut degree, mut m) = (None, None, None);
    for kv in fields.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| perr(hline, "malformed field"))?;
        let v: u64 = v.parse().map_err(|_| perr(hline, "non-numeric field"))?;
        match k {
            "n" => n = Some(v as u32),
            "d" => degree = Some(1usize << v),
            "D" => degree = Some(v as usize),
            "M" => m = Some(v),
            _ => return Err(perr(hline, "unknown field")),
        }
    }
    let (n, degree, right_size) = match (n, degree, m) {
        (Some(n), Some(d), Some(m)) if n <= 32 => (n, d, m),
        _ => return Err(perr(hline, "header needs n, d (or D) and M")),
    };
    let mut rows: Vec<(LeftNode, Vec<RightId>)> = Vec::new();
    for (ln, line) in lines {
        let line = line?;
        let (x, rest) = line.split_once(':').ok_or_else(|| perr(ln, "expected `<hex>: ids`"))?;
        let x = u64::from_str_radix(x.trim(), 16).map_err(|_| perr(ln, "bad left id"))?;
        if x >> n != 0 {
            return Err(perr(ln, "left id exceeds n bits"));
        }
        let ids = rest
            .trim()
            .split(',')
            .map(|t| t.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| perr(ln, "bad right id"))?;
        if ids.len() != degree {
            return Err(perr(ln, &format!("expected {degree} entries, found {}", ids.len())));
        }
        if ids.iter().any(|&z| z >= right_size) {
            return Err(perr(ln, "right id out of range"));
        }
        if rows.last().is_some_and(|(prev, _)| *prev >= x) {
            return Err(perr(ln, "left ids must be strictly ascending"));
        }
        rows.push((x, ids));
    }
    if rows.len() as u64 == 1u64 << n {
        let table = rows.into_iter().flat_map(|(_, ids)| ids).collect();
        return LeftRegularGraph::from_table(n, degree, right_size, label, table);
    }
    if rows.is_empty() {
        return Err(GraphError::EmptyRestriction);
    }
    let domain = LeftSubset::new(n, rows.iter().map(|(x, _)| *x))?;
    let row_index = rows.iter().enumerate().map(|(i, (x, _))| (*x, i)).collect();
    let table = rows.into_iter().flat_map(|(_, ids)| ids).collect();
    let mut g = LeftRegularGraph::with_adjacency(
        n,
        degree,
        right_size,
        label,
        Arc::new(SparseTableAdjacency { degree, rows: row_index, table }),
    )?;
    g.domain = Some(Arc::new(domain));
    Ok(g)
}
