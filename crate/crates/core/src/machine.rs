//! A small total machine whose plain complexity is exactly computable.
//!
//! Programs start with a two-bit header:
//!
//! | header | mode        | body                                                        |
//! |--------|-------------|-------------------------------------------------------------|
//! | `00`   | literal     | the output itself                                           |
//! | `01`   | repeat      | `gamma(|w|) w gamma(count)`, nothing after                  |
//! | `10`   | graph index | variant bit, `gamma(ℓ) gamma(c+1) gamma(1/δ) gamma(n)`, `z` |
//! | `11`   | —           | always ⊥                                                    |
//!
//! Complexity is measured over the literal and repeat modes only. Graph-index
//! programs are answered by an external [`GraphIndexResolver`].

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::bigraph::{non_rich_members, LeftRegularGraph, LeftSubset};
use crate::bits::{gamma, Bits};
use crate::ratio::Rational;
use crate::rng::{GOLDEN_GAMMA, MIX_MUL_1, MIX_MUL_2};

/// Largest string length the complexity table will cover.
pub const MAX_TABLE_N: u32 = 14;

#[derive(Debug, Error)]
pub enum MachineError {
    #[error("n_max = {0} exceeds the table cap {MAX_TABLE_N}")]
    TableCap(u32),
    #[error("string of length {len} is not tabulated (n_max = {n_max})")]
    NotTabulated { len: usize, n_max: u32 },
    #[error("program index covers lengths up to {have}, query needs {need}")]
    IndexTooSmall { have: usize, need: usize },
    #[error("augmented level {ell} needs the level-{} set and graph", ell + 1)]
    MissingUpper { ell: u32 },
    #[error("level mismatch: {0}")]
    LevelMismatch(String),
    #[error("machine definition: {0}")]
    Definition(String),
    #[error(transparent)]
    Graph(#[from] crate::bigraph::GraphError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The parameters named by a graph-index program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphKey {
    /// `true` for the chain's augmented sets, `false` for plain `{C(x) < ℓ}`.
    pub augmented: bool,
    pub ell: u32,
    pub c: u32,
    pub inv_delta: u64,
    pub n: u32,
}

/// Answers graph-index programs: which graph and set a key names, and the
/// first member of the set adjacent to a right node.
pub trait GraphIndexResolver: Sync {
    /// Bit length of right node ids for the key, or `None` if nothing is built for it.
    fn right_bits(&self, key: &GraphKey) -> Option<u32>;

    /// The first member (in enumeration order) adjacent to `z`, and the number
    /// of members examined to find it.
    fn first_neighbor(&self, key: &GraphKey, z: u64) -> (Option<u64>, u64);
}

/// Encodes a graph-index program.
pub fn encode_graph_program(key: &GraphKey, z: u64, right_bits: u32) -> Bits {
    let mut p: Bits = "10".parse().unwrap();
    p.push(key.augmented);
    for v in [key.ell as u64, key.c as u64 + 1, key.inv_delta, key.n as u64] {
        p.extend_from(&gamma(v));
    }
    p.push_value(z as u128, right_bits as usize);
    p
}

/// Splits a graph-index program into its key and right-node bits.
pub fn decode_graph_program(p: &Bits) -> Option<(GraphKey, Bits)> {
    let mut r = p.reader();
    if r.read_value(2)? != 0b10 {
        return None;
    }
    let augmented = r.read_bit()?;
    let ell = u32::try_from(r.read_gamma()?).ok()?;
    let c = u32::try_from(r.read_gamma()? - 1).ok()?;
    let inv_delta = r.read_gamma()?;
    let n = u32::try_from(r.read_gamma()?).ok()?;
    Some((GraphKey { augmented, ell, c, inv_delta, n }, r.rest()))
}

/// Output of a run together with the steps it used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunResult {
    pub output: Option<Bits>,
    pub steps: u64,
}

/// The toy machine: header table plus a step budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToyMachine {
    pub budget_base: u64,
    pub budget_cap: u64,
}

impl Default for ToyMachine {
    fn default() -> Self {
        ToyMachine { budget_base: 4096, budget_cap: 1 << 22 }
    }
}

impl ToyMachine {
    /// Version tag; changes whenever anything that affects outputs changes.
    pub fn version(&self) -> String {
        format!("toy-v1-b{}-c{}", self.budget_base, self.budget_cap)
    }

    /// Steps allowed for a program of `len` bits.
    pub fn budget(&self, len: usize) -> u64 {
        if len >= 40 {
            return self.budget_cap;
        }
        self.budget_base.saturating_mul(1u64 << len).min(self.budget_cap)
    }

    pub fn run(&self, p: &Bits, resolver: Option<&dyn GraphIndexResolver>) -> Option<Bits> {
        self.execute(p, resolver, usize::MAX).output
    }

    /// Runs `p`; outputs longer than `out_cap` are reported as ⊥.
    pub fn execute(&self, p: &Bits, resolver: Option<&dyn GraphIndexResolver>, out_cap: usize) -> RunResult {
        let budget = self.budget(p.len());
        let mut r = p.reader();
        let bottom = |steps| RunResult { output: None, steps };
        let Some(header) = r.read_value(2) else {
            return bottom(r.position() as u64);
        };
        match header {
            0b00 => {
                let out = r.rest();
                let steps = (p.len() + out.len()) as u64;
                if steps > budget || out.len() > out_cap {
                    return bottom(steps.min(budget));
                }
                RunResult { output: Some(out), steps }
            }
            0b01 => {
                let parsed = (|| {
                    let width = usize::try_from(r.read_gamma()?).ok()?;
                    let w = r.read_bits(width)?;
                    let count = r.read_gamma()?;
                    (r.remaining() == 0).then_some((w, count))
                })();
                let read = r.position() as u64;
                let Some((w, count)) = parsed else {
                    return bottom(read);
                };
                let written = (w.len() as u64).saturating_mul(count);
                let steps = read.saturating_add(written);
                if steps > budget || written > out_cap as u64 {
                    return bottom(steps.min(budget));
                }
                let mut out = Bits::new();
                for _ in 0..count {
                    out.extend_from(&w);
                }
                RunResult { output: Some(out), steps }
            }
            0b10 => {
                let Some(resolver) = resolver else {
                    return bottom(r.position() as u64);
                };
                let Some((key, z)) = decode_graph_program(p) else {
                    return bottom(p.len() as u64);
                };
                let read = p.len() as u64;
                match resolver.right_bits(&key) {
                    Some(bits) if bits as usize == z.len() && bits <= 64 => {}
                    _ => return bottom(read),
                }
                let z = z.value().unwrap_or(0) as u64;
                let (found, examined) = resolver.first_neighbor(&key, z);
                let steps = read + examined + found.map_or(0, |_| key.n as u64);
                match found {
                    Some(x) if steps <= budget && (key.n as usize) <= out_cap => {
                        RunResult { output: Some(Bits::from_value(x as u128, key.n as usize)), steps }
                    }
                    _ => bottom(steps.min(budget)),
                }
            }
            _ => bottom(2),
        }
    }

    /// The human-readable definition file pinning every convention.
    pub fn definition(&self) -> String {
        format!(
            "TOYMACHINE version={version}\n\
             # program = header (2 bits) + body\n\
             header 00 literal: output = body\n\
             header 01 repeat: body = gamma(|w|) w gamma(count), no trailing bits; output = w repeated count times\n\
             header 10 graph-index: body = variant(1 bit: 0 plain, 1 augmented) gamma(ell) gamma(c+1) gamma(inv_delta) gamma(n) z; |z| must equal the right-id width of the named graph; output = first member of B adjacent to z, else bottom\n\
             header 11 undefined: bottom\n\
             gamma: for v >= 1, floor(log2 v) zero bits followed by v in binary (most significant bit first)\n\
             complexity: minimum program length over headers 00 and 01 only\n\
             budget base={base} cap={cap} steps=bits_read+bits_written+members_examined limit=min(base*2^len,cap)\n\
             rng splitmix64 gamma={g:#018x} mul1={m1:#018x} mul2={m2:#018x}\n",
            version = self.version(),
            base = self.budget_base,
            cap = self.budget_cap,
            g = GOLDEN_GAMMA,
            m1 = MIX_MUL_1,
            m2 = MIX_MUL_2,
        )
    }

    /// Parses a definition file, checking that its pinned constants match this build.
    pub fn from_definition(text: &str) -> Result<ToyMachine, MachineError> {
        let mut budget = None;
        let mut version = None;
        let mut rng_ok = false;
        for line in text.lines() {
            let mut words = line.split_whitespace();
            match words.next() {
                Some("TOYMACHINE") => version = words.next().and_then(|w| w.strip_prefix("version=")).map(str::to_string),
                Some("budget") => {
                    let fields: HashMap<&str, &str> = words.filter_map(|w| w.split_once('=')).collect();
                    let get = |k| fields.get(k).and_then(|v: &&str| v.parse::<u64>().ok());
                    budget = get("base").zip(get("cap"));
                }
                Some("rng") => {
                    let want = [("gamma", GOLDEN_GAMMA), ("mul1", MIX_MUL_1), ("mul2", MIX_MUL_2)];
                    let fields: HashMap<&str, &str> = words.filter_map(|w| w.split_once('=')).collect();
                    rng_ok = want.iter().all(|(k, v)| {
                        fields
                            .get(k)
                            .and_then(|s| u64::from_str_radix(s.trim_start_matches("0x"), 16).ok())
                            == Some(*v)
                    });
                }
                _ => {}
            }
        }
        let (base, cap) = budget.ok_or_else(|| MachineError::Definition("missing budget line".into()))?;
        if !rng_ok {
            return Err(MachineError::Definition("rng constants differ from this build".into()));
        }
        let m = ToyMachine { budget_base: base, budget_cap: cap };
        if version.as_deref() != Some(m.version().as_str()) {
            return Err(MachineError::Definition("version tag does not match the budget".into()));
        }
        Ok(m)
    }
}

/// Exact complexity of every string up to `n_max` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityTable {
    pub version: String,
    pub n_max: u32,
    /// `values[len][x]` is `C` of the `len`-bit string with value `x`.
    values: Vec<Vec<u32>>,
    /// Least `e` with `C(x) < |x| + e` for every tabulated `x`.
    pub e_const: u32,
}

fn all_programs(max_len: usize) -> impl Iterator<Item = Bits> {
    (0..=max_len).flat_map(|len| (0..(1u128 << len)).map(move |v| Bits::from_value(v, len)))
}

/// Runs every program of at most `n_max + 2` bits (the literal bound).
pub fn complexity_table(m: &ToyMachine, n_max: u32) -> Result<ComplexityTable, MachineError> {
    if n_max > MAX_TABLE_N {
        return Err(MachineError::TableCap(n_max));
    }
    let mut values: Vec<Vec<u32>> = (0..=n_max).map(|len| vec![u32::MAX; 1 << len]).collect();
    for p in all_programs(n_max as usize + 2) {
        if let Some(x) = m.execute(&p, None, n_max as usize).output {
            let slot = &mut values[x.len()][x.value().unwrap() as usize];
            *slot = (*slot).min(p.len() as u32);
        }
    }
    let mut e_const = 0;
    for (len, row) in values.iter().enumerate() {
        for &c in row {
            assert!(c != u32::MAX, "literal mode covers every string");
            e_const = e_const.max(c + 1 - len as u32);
        }
    }
    Ok(ComplexityTable { version: m.version(), n_max, values, e_const })
}

impl ComplexityTable {
    /// `C` of the `n`-bit string with value `x`.
    pub fn c(&self, n: u32, x: u64) -> u32 {
        self.values[n as usize][x as usize]
    }

    pub fn c_of(&self, x: &Bits) -> Result<u32, MachineError> {
        if x.len() > self.n_max as usize {
            return Err(MachineError::NotTabulated { len: x.len(), n_max: self.n_max });
        }
        Ok(self.c(x.len() as u32, x.value().unwrap() as u64))
    }

    /// Number of strings (of any tabulated length) with `C < ell`.
    pub fn count_below(&self, ell: u32) -> u64 {
        self.values.iter().flatten().filter(|&&c| c < ell).count() as u64
    }

    pub fn write(&self, mut w: impl Write) -> Result<(), MachineError> {
        writeln!(w, "CTABLE version={} n_max={}", self.version, self.n_max)?;
        for (len, row) in self.values.iter().enumerate() {
            for (x, c) in row.iter().enumerate() {
                writeln!(w, "{} {}", Bits::from_value(x as u128, len).to_prefixed_hex(), c)?;
            }
        }
        Ok(())
    }

    pub fn read(r: impl BufRead) -> Result<ComplexityTable, MachineError> {
        let perr = |line: usize, msg: &str| MachineError::Parse { line, msg: msg.to_string() };
        let mut header: Option<(String, u32)> = None;
        let mut values: Vec<Vec<u32>> = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let ln = i + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match &header {
                None => {
                    let rest = line.strip_prefix("CTABLE ").ok_or_else(|| perr(ln, "expected CTABLE header"))?;
                    let fields: HashMap<&str, &str> = rest.split_whitespace().filter_map(|w| w.split_once('=')).collect();
                    let version = fields.get("version").ok_or_else(|| perr(ln, "missing version"))?.to_string();
                    let n_max: u32 = fields
                        .get("n_max")
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| perr(ln, "missing n_max"))?;
                    if n_max > MAX_TABLE_N {
                        return Err(MachineError::TableCap(n_max));
                    }
                    values = (0..=n_max).map(|len| vec![u32::MAX; 1 << len]).collect();
                    header = Some((version, n_max));
                }
                Some((_, n_max)) => {
                    let (x, c) = line.split_once(' ').ok_or_else(|| perr(ln, "expected `<len:hex> <C>`"))?;
                    let x = Bits::parse_prefixed_hex(x).ok_or_else(|| perr(ln, "bad string"))?;
                    let c: u32 = c.trim().parse().map_err(|_| perr(ln, "bad complexity"))?;
                    if x.len() > *n_max as usize {
                        return Err(perr(ln, "string longer than n_max"));
                    }
                    values[x.len()][x.value().unwrap() as usize] = c;
                }
            }
        }
        let (version, n_max) = header.ok_or_else(|| perr(0, "empty table file"))?;
        let mut e_const = 0;
        for (len, row) in values.iter().enumerate() {
            for &c in row {
                if c == u32::MAX {
                    return Err(perr(0, "table is incomplete"));
                }
                e_const = e_const.max((c + 1).saturating_sub(len as u32));
            }
        }
        Ok(ComplexityTable { version, n_max, values, e_const })
    }
}

/// An enumerable set `B_{n,ℓ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BSet {
    pub n: u32,
    pub ell: u32,
    /// `{x : C(x) < ℓ}` for the plain variant, `{x : C(x) < ℓ − 1}` otherwise; ascending.
    pub first_type: Vec<u64>,
    /// Non-rich members of the level above that are not of the first type; ascending.
    pub second_type: Vec<u64>,
    /// All members in enumeration order: ascending complexity, then lexicographic.
    pub order: Vec<u64>,
}

impl BSet {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.first_type.binary_search(&x).is_ok() || self.second_type.binary_search(&x).is_ok()
    }

    pub fn subset(&self) -> LeftSubset {
        LeftSubset::new(self.n, self.order.iter().copied()).expect("members are n-bit strings")
    }
}

/// The level above, needed for an augmented set.
#[derive(Clone, Copy)]
pub struct Upper<'a> {
    pub set: &'a BSet,
    pub graph: &'a LeftRegularGraph,
}

/// Which set to enumerate.
#[derive(Clone, Copy)]
pub enum BVariant<'a> {
    Plain,
    /// The chain's sets; `None` only at the top level `n + e + 1`.
    Augmented { upper: Option<Upper<'a>>, delta: Rational },
}

/// Enumerates `B_{n,ℓ}`.
pub fn enumerate_b(table: &ComplexityTable, n: u32, ell: u32, variant: BVariant<'_>) -> Result<BSet, MachineError> {
    if n > table.n_max {
        return Err(MachineError::NotTabulated { len: n as usize, n_max: table.n_max });
    }
    let bound = match variant {
        BVariant::Plain => ell,
        BVariant::Augmented { .. } => ell.saturating_sub(1),
    };
    let first_type: Vec<u64> = (0..(1u64 << n)).filter(|&x| table.c(n, x) < bound).collect();
    let second_type = match variant {
        BVariant::Plain => Vec::new(),
        BVariant::Augmented { upper: None, .. } => {
            if ell < n + table.e_const + 1 {
                return Err(MachineError::MissingUpper { ell });
            }
            Vec::new()
        }
        BVariant::Augmented { upper: Some(up), delta } => {
            if up.set.n != n || up.set.ell != ell + 1 {
                return Err(MachineError::LevelMismatch(format!(
                    "level {ell} needs the level-{} set over {n} bits, got level {} over {} bits",
                    ell + 1,
                    up.set.ell,
                    up.set.n
                )));
            }
            if up.set.is_empty() {
                Vec::new()
            } else {
                let mut bad = non_rich_members(up.graph, &up.set.subset(), 2, &delta)?;
                bad.retain(|x| first_type.binary_search(x).is_err());
                bad
            }
        }
    };
    let mut order: Vec<u64> = first_type.iter().chain(&second_type).copied().collect();
    order.sort_by_key(|&x| (table.c(n, x), x));
    Ok(BSet { n, ell, first_type, second_type, order })
}

/// Every program (over the complexity-defining modes) of bounded length,
/// grouped by output.
pub struct ProgramIndex {
    pub max_len: usize,
    pub max_out: usize,
    by_output: HashMap<Bits, Vec<Bits>>,
}

impl ProgramIndex {
    pub fn build(m: &ToyMachine, max_len: usize, max_out: usize) -> ProgramIndex {
        let mut by_output: HashMap<Bits, Vec<Bits>> = HashMap::new();
        for p in all_programs(max_len) {
            if let Some(x) = m.execute(&p, None, max_out).output {
                by_output.entry(x).or_default().push(p);
            }
        }
        ProgramIndex { max_len, max_out, by_output }
    }

    pub fn programs_for(&self, x: &Bits) -> &[Bits] {
        self.by_output.get(x).map_or(&[], Vec::as_slice)
    }
}

/// All programs for `x` of length at most `C(x) + c`, shortest first.
pub fn c_short_oracle(table: &ComplexityTable, index: &ProgramIndex, x: &Bits, c: u32) -> Result<Vec<Bits>, MachineError> {
    let limit = (table.c_of(x)? + c) as usize;
    if limit > index.max_len || x.len() > index.max_out {
        return Err(MachineError::IndexTooSmall { have: index.max_len, need: limit });
    }
    let mut out: Vec<Bits> = index.programs_for(x).iter().filter(|p| p.len() <= limit).cloned().collect();
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    Ok(out)
}

/// The same set by a direct scan of every program up to the length limit.
pub fn c_short_scan(m: &ToyMachine, table: &ComplexityTable, x: &Bits, c: u32) -> Result<Vec<Bits>, MachineError> {
    let limit = (table.c_of(x)? + c) as usize;
    Ok(all_programs(limit)
        .filter(|p| m.execute(p, None, x.len()).output.as_ref() == Some(x))
        .collect())
}

/// Whether a program of length `len` for `x` is `c`-short against the table.
pub fn is_c_short(table: &ComplexityTable, n: u32, x: u64, len: usize, c: u32) -> bool {
    len as u64 <= table.c(n, x) as u64 + c as u64
}

/// Per-length counts of strings by complexity (for reports).
pub fn complexity_histogram(table: &ComplexityTable, n: u32) -> BTreeMap<u32, u64> {
    let mut h = BTreeMap::new();
    for x in 0..(1u64 << n) {
        *h.entry(table.c(n, x)).or_insert(0) += 1;
    }
    h
}
