//! Configuration, file layout and the commands behind the command-line tool.
//!
//! Every file written here starts with a provenance comment naming the
//! configuration hash and machine version; files from a different
//! configuration are refused rather than mixed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bigraph::GraphError;
use crate::extractor::{
    audit_sampled, read_extractor, search_extractor, verify_exact, write_extractor, ExtractorError, ExtractorInstance,
    SearchParams, SampledAudit, Status, Verification,
};
use crate::listapprox::{length_ratio, Lab, ListError, PromiseRun, CHAIN_C};
use crate::machine::{
    c_short_oracle, complexity_table, ComplexityTable, MachineError, ProgramIndex, ToyMachine,
};
use crate::ratio::{parse_rational, render, Rational};
use crate::richowner::{BuildOptions, RichOwnerError, SearchSource};
use crate::bits::Bits;

/// Environment variable overriding the configured output directory.
pub const OUT_DIR_ENV: &str = "SHORTLIST_OUT";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("{path}: produced under {found}, current run is {expected}; refusing to mix artifacts")]
    Provenance { path: String, found: String, expected: String },
    #[error("machine version {found} does not match the configured {expected}")]
    MachineVersion { found: String, expected: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Extractor(#[from] ExtractorError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    RichOwner(#[from] RichOwnerError),
    #[error(transparent)]
    List(#[from] ListError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything that determines an experiment's outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub machine_version: String,
    pub n_values: Vec<u32>,
    /// Each `δ` is `1/inv_delta`.
    pub inv_deltas: Vec<u64>,
    pub a_d: u32,
    pub a_m: u32,
    pub k_d: u32,
    pub k_m: u32,
    /// Frozen overhead threshold for "short".
    pub c_star: u32,
    /// Frozen bound on `(|entry| − ℓ)/(c + log2(n/δ))`.
    pub k_len: u32,
    pub seed: u64,
    pub sampled_trials: u64,
    pub retries: u32,
    pub exact_budget: u64,
    pub out_dir: PathBuf,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            machine_version: ToyMachine::default().version(),
            n_values: vec![4, 6, 8],
            inv_deltas: vec![2, 4],
            a_d: 2,
            a_m: 2,
            k_d: 6,
            k_m: 6,
            c_star: 49,
            k_len: 8,
            seed: 1,
            sampled_trials: 256,
            retries: 16,
            exact_budget: crate::extractor::DEFAULT_EXACT_BUDGET,
            out_dir: PathBuf::from("out"),
            workers: 8,
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Keys that affect results, in canonical order.
    fn result_fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("machine_version", self.machine_version.clone()),
            ("n_values", join(&self.n_values)),
            ("inv_deltas", join(&self.inv_deltas)),
            ("a_d", self.a_d.to_string()),
            ("a_m", self.a_m.to_string()),
            ("k_d", self.k_d.to_string()),
            ("k_m", self.k_m.to_string()),
            ("c_star", self.c_star.to_string()),
            ("k_len", self.k_len.to_string()),
            ("seed", self.seed.to_string()),
            ("sampled_trials", self.sampled_trials.to_string()),
            ("retries", self.retries.to_string()),
            ("exact_budget", self.exact_budget.to_string()),
        ]
    }

    /// The flat `key = value` form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.result_fields() {
            writeln!(out, "{k} = {v}").unwrap();
        }
        writeln!(out, "out_dir = {}", self.out_dir.display()).unwrap();
        writeln!(out, "workers = {}", self.workers).unwrap();
        out
    }

    pub fn parse(text: &str) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = ExperimentConfig::default();
        for (i, line) in text.lines().enumerate() {
            let err = |msg: String| HarnessError::Config { line: i + 1, msg };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key = value".into()))?;
            let (k, v) = (k.trim(), v.trim());
            fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
                v.parse().map_err(|_| format!("not a number: {v:?}"))
            }
            fn list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String> {
                v.split(',').map(|s| num(s.trim())).collect()
            }
            match k {
                "machine_version" => cfg.machine_version = v.to_string(),
                "n_values" => cfg.n_values = list(v).map_err(err)?,
                "inv_deltas" => cfg.inv_deltas = list(v).map_err(err)?,
                "a_d" => cfg.a_d = num(v).map_err(err)?,
                "a_m" => cfg.a_m = num(v).map_err(err)?,
                "k_d" => cfg.k_d = num(v).map_err(err)?,
                "k_m" => cfg.k_m = num(v).map_err(err)?,
                "c_star" => cfg.c_star = num(v).map_err(err)?,
                "k_len" => cfg.k_len = num(v).map_err(err)?,
                "seed" => cfg.seed = num(v).map_err(err)?,
                "sampled_trials" => cfg.sampled_trials = num(v).map_err(err)?,
                "retries" => cfg.retries = num(v).map_err(err)?,
                "exact_budget" => cfg.exact_budget = num(v).map_err(err)?,
                "out_dir" => cfg.out_dir = PathBuf::from(v),
                "workers" => cfg.workers = num(v).map_err(err)?,
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        if cfg.inv_deltas.contains(&0) {
            return Err(HarnessError::Config { line: 0, msg: "inv_deltas must be positive".into() });
        }
        Ok(cfg)
    }

    /// Reads a config file (or the defaults) and applies the environment override.
    pub fn load(path: Option<&Path>) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match path {
            Some(p) => Self::parse(&fs::read_to_string(p)?)?,
            None => ExperimentConfig::default(),
        };
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
            cfg.out_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }

    /// SHA-256 over the result-affecting keys (not the output directory or
    /// worker count), first 16 hex digits.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.result_fields() {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())[..16].to_string()
    }

    pub fn provenance(&self) -> String {
        format!("# provenance config={} machine={}", self.hash(), self.machine_version)
    }

    pub fn search_source(&self) -> SearchSource {
        let mut s = SearchSource::new(self.seed);
        s.a_d = self.a_d;
        s.a_m = self.a_m;
        s.retries = self.retries;
        s.exact_budget = self.exact_budget;
        s.sampled_trials = Some(self.sampled_trials);
        s
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions { k_d: self.k_d, k_m: self.k_m, separation_cap: true }
    }
}

/// The provenance line of a file, if it has one.
pub fn read_provenance(text: &str) -> Option<&str> {
    text.lines().find(|l| l.starts_with("# provenance "))
}

/// Renders `hits/total`, optionally with a decimal.
pub fn render_probability(hits: u64, total: u64, decimal: bool) -> String {
    if decimal {
        format!("{hits}/{total} decimal={:.6}", hits as f64 / total as f64)
    } else {
        format!("{hits}/{total}")
    }
}

fn hex_width(bits: u32) -> usize {
    (bits as usize).div_ceil(4).max(1)
}

/// Parses a hex string that must fit in `bits` bits.
pub fn parse_hex(s: &str, bits: u32) -> Result<u64, HarnessError> {
    let v = u64::from_str_radix(s.trim_start_matches("0x"), 16).map_err(|_| HarnessError::Argument(format!("not hex: {s:?}")))?;
    if bits < 64 && v >> bits != 0 {
        return Err(HarnessError::Argument(format!("{s} does not fit in {bits} bits")));
    }
    Ok(v)
}

/// Result of one profile run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileSummary {
    pub n: u32,
    pub inv_delta: u64,
    pub c_star: u32,
    pub r: u32,
    /// Hit counts by string.
    pub hits: Vec<u64>,
    /// Smallest threshold at which each string reaches `1 − δ`.
    pub min_c_star: Vec<Option<i64>>,
}

impl ProfileSummary {
    pub fn total(&self) -> u64 {
        1 << self.r
    }

    pub fn worst(&self) -> u64 {
        *self.hits.iter().min().unwrap_or(&0)
    }

    /// Every string reaches probability `1 − δ`.
    pub fn pass(&self) -> bool {
        let d = self.inv_delta as u128;
        self.hits.iter().all(|&h| h as u128 * d >= self.total() as u128 * (d - 1))
    }

    pub fn calibrated_c_star(&self) -> Option<i64> {
        self.min_c_star.iter().copied().collect::<Option<Vec<_>>>()?.into_iter().max()
    }
}

/// A configured lab plus file output.
pub struct Harness {
    pub config: ExperimentConfig,
    pub lab: Lab,
}

impl Harness {
    /// Sets up the machine and complexity table for the configured sizes.
    pub fn new(config: ExperimentConfig) -> Result<Harness, HarnessError> {
        let machine = ToyMachine::default();
        if machine.version() != config.machine_version {
            return Err(HarnessError::MachineVersion { found: machine.version(), expected: config.machine_version.clone() });
        }
        let n_max = config.n_values.iter().copied().max().unwrap_or(8).max(10);
        let table = Arc::new(complexity_table(&machine, n_max)?);
        let lab = Lab::new(machine, table, Arc::new(config.search_source()), config.build_options());
        Ok(Harness { config, lab })
    }

    pub fn table(&self) -> &ComplexityTable {
        &self.lab.table
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    /// Writes `body` under the provenance line, refusing to overwrite a file
    /// from another configuration.
    fn emit(&self, name: &str, body: &[u8]) -> Result<PathBuf, HarnessError> {
        let path = self.path(name);
        self.check_existing(&path)?;
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut f = fs::File::create(&path)?;
        writeln!(f, "{}", self.config.provenance())?;
        f.write_all(body)?;
        Ok(path)
    }

    fn check_existing(&self, path: &Path) -> Result<(), HarnessError> {
        if let Ok(text) = fs::read_to_string(path) {
            let want = self.config.provenance();
            match read_provenance(&text) {
                Some(p) if p == want => {}
                other => {
                    return Err(HarnessError::Provenance {
                        path: path.display().to_string(),
                        found: other.unwrap_or("no provenance").to_string(),
                        expected: want,
                    })
                }
            }
        }
        Ok(())
    }

    pub fn machine_define(&self) -> Result<PathBuf, HarnessError> {
        self.emit("machine.txt", self.lab.machine.definition().as_bytes())
    }

    pub fn machine_table(&self, n_max: u32) -> Result<PathBuf, HarnessError> {
        let table = complexity_table(&self.lab.machine, n_max)?;
        let mut body = Vec::new();
        table.write(&mut body)?;
        self.emit(&format!("ctable-n{n_max}.txt"), &body)
    }

    fn chain_dir(n: u32, inv_delta: u64) -> String {
        format!("chain-n{n}-inv{inv_delta}")
    }

    /// Builds (or rebuilds identically) every level of the chain and writes
    /// one manifest and one set file per level plus a summary.
    pub fn build_chain(&self, n: u32, inv_delta: u64) -> Result<Vec<PathBuf>, HarnessError> {
        let dir = Self::chain_dir(n, inv_delta);
        self.check_existing(&self.path(&format!("{dir}/chain.summary")))?;
        let chain = self.lab.chain(n, inv_delta)?;
        let mut paths = Vec::new();
        let mut summary = String::new();
        writeln!(summary, "CHAIN n={n} inv_delta={inv_delta} c={CHAIN_C} e={} r={} levels={}", chain.e_const, chain.r, chain.levels.len()).unwrap();
        for level in &chain.levels {
            let ell = level.ell();
            let mut manifest = level.graph.manifest();
            manifest.extra.push(("machine".into(), self.config.machine_version.clone()));
            manifest.extra.push(("config".into(), self.config.hash()));
            let mut body = Vec::new();
            manifest.write(&mut body)?;
            paths.push(self.emit(&format!("{dir}/level-{ell:02}.manifest"), &body)?);

            let set = &level.set;
            let mut body = String::new();
            writeln!(body, "BSET n={n} ell={ell} first={} second={}", set.first_type.len(), set.second_type.len()).unwrap();
            for &x in &set.order {
                let kind = if set.first_type.binary_search(&x).is_ok() { "first" } else { "second" };
                writeln!(body, "{:0w$x} {} {kind}", x, self.table().c(n, x), w = hex_width(n)).unwrap();
            }
            paths.push(self.emit(&format!("{dir}/level-{ell:02}.bset"), body.as_bytes())?);

            let a = &level.audit;
            writeln!(
                summary,
                "level ell={ell} size={} first={} second={} non_rich={} allowed={} extractor_allowance={} d_out={} m_out={} t={} program_len={} extractor={}",
                a.size,
                a.first_type,
                a.second_type,
                a.non_rich,
                a.allowed,
                a.extractor_allowance,
                level.d_out(),
                level.graph.m_out,
                level.graph.split.t,
                level.program_len,
                level.graph.extractor.status
            )
            .unwrap();
        }
        paths.push(self.emit(&format!("{dir}/chain.summary"), summary.as_bytes())?);
        Ok(paths)
    }

    fn ensure_chain(&self, n: u32, inv_delta: u64) -> Result<(), HarnessError> {
        let summary = self.path(&format!("{}/chain.summary", Self::chain_dir(n, inv_delta)));
        if summary.exists() {
            self.check_existing(&summary)
        } else {
            self.build_chain(n, inv_delta).map(|_| ())
        }
    }

    pub fn run_list(&self, n: u32, x: u64, inv_delta: u64, seed: u64) -> Result<PathBuf, HarnessError> {
        self.ensure_chain(n, inv_delta)?;
        let list = self.lab.generate_list(x, n, inv_delta, seed)?;
        let mut body = Vec::new();
        list.write(&mut body)?;
        for e in &list.entries {
            let out = self.lab.run(&e.program.bits);
            writeln!(
                body,
                "run ell={} output={}",
                e.ell,
                out.map_or("bottom".to_string(), |o| format!("{:0w$x}", o.value().unwrap(), w = hex_width(n)))
            )?;
        }
        let name = format!("list-n{n}-inv{inv_delta}-x{:0w$x}-s{:x}.txt", x, seed, w = hex_width(n));
        self.emit(&name, &body)
    }

    pub fn run_promise(&self, n: u32, x: u64, c_of_x: u32, inv_delta: u64, seed: u64) -> Result<(PathBuf, PromiseRun), HarnessError> {
        let run = self.lab.short_program_given_c(x, n, c_of_x, inv_delta, seed)?;
        let out = self.lab.run(&run.program.bits);
        let mut body = String::new();
        writeln!(
            body,
            "PROMISE x={:0w$x} n={n} supplied_c={c_of_x} inv_delta={inv_delta} seed={seed:x} ell={} c={} seed_bits={}",
            x,
            run.program.key.ell,
            run.program.key.c,
            run.seed_bits,
            w = hex_width(n)
        )
        .unwrap();
        writeln!(body, "status={}", if run.promise_holds { "promise-holds" } else { "promise-violated" }).unwrap();
        writeln!(body, "program len={} bits={}", run.program.len(), run.program.bits.to_prefixed_hex()).unwrap();
        let computes = out.as_ref() == Some(&Bits::from_value(x as u128, n as usize));
        writeln!(
            body,
            "output={} computes_x={}",
            out.map_or("bottom".to_string(), |o| format!("{:0w$x}", o.value().unwrap(), w = hex_width(n))),
            computes as u8
        )
        .unwrap();
        let name = format!("promise-n{n}-inv{inv_delta}-x{:0w$x}-c{c_of_x}-s{seed:x}.txt", x, w = hex_width(n));
        Ok((self.emit(&name, body.as_bytes())?, run))
    }

    /// Exact profile of every `n`-bit string.
    pub fn profile(&self, n: u32, inv_delta: u64, c_star: u32) -> Result<ProfileSummary, HarnessError> {
        self.ensure_chain(n, inv_delta)?;
        let chain = self.lab.chain(n, inv_delta)?;
        let mut hits = Vec::new();
        let mut min_c_star = Vec::new();
        for x in 0..(1u64 << n) {
            let p = chain.exact_success_profile(self.table(), x, c_star)?;
            hits.push(p.hits);
            min_c_star.push(chain.min_c_star(self.table(), x)?);
        }
        Ok(ProfileSummary { n, inv_delta, c_star, r: chain.r, hits, min_c_star })
    }

    /// Runs the profile and writes the summary, plus per-seed records for the
    /// first `records` seeds of every string when asked.
    pub fn run_profile(
        &self,
        n: u32,
        inv_delta: u64,
        c_star: u32,
        records: Option<u64>,
        decimal: bool,
    ) -> Result<(PathBuf, ProfileSummary), HarnessError> {
        let summary = self.profile(n, inv_delta, c_star)?;
        let total = summary.total();
        let mut body = String::new();
        writeln!(body, "PROFILE n={n} inv_delta={inv_delta} c_star={c_star} r={}", summary.r).unwrap();
        let mut histogram: BTreeMap<i64, u64> = BTreeMap::new();
        for (x, (&h, mc)) in summary.hits.iter().zip(&summary.min_c_star).enumerate() {
            writeln!(
                body,
                "x={:0w$x} prob={} min_c_star={}",
                x,
                render_probability(h, total, decimal),
                mc.map_or("none".to_string(), |c| c.to_string()),
                w = hex_width(n)
            )
            .unwrap();
            *histogram.entry(mc.unwrap_or(-1)).or_insert(0) += 1;
        }
        for (c, count) in &histogram {
            writeln!(body, "overhead {c} strings={count}").unwrap();
        }
        let chain = self.lab.chain(n, inv_delta)?;
        for level in &chain.levels {
            writeln!(body, "length ell={} program_len={} ratio={:.4}", level.ell(), level.program_len, length_ratio(level)).unwrap();
        }
        writeln!(
            body,
            "summary worst={} target={}/{} calibrated_c_star={} pass={}",
            render_probability(summary.worst(), total, decimal),
            inv_delta - 1,
            inv_delta,
            summary.calibrated_c_star().map_or("none".to_string(), |c| c.to_string()),
            summary.pass() as u8
        )
        .unwrap();
        let path = self.emit(&format!("profile-n{n}-inv{inv_delta}.summary"), body.as_bytes())?;
        if let Some(count) = records {
            let mut rec = Vec::new();
            for x in 0..(1u64 << n) {
                let p = chain.exact_success_profile(self.table(), x, c_star)?;
                p.write_records(0..count.min(p.total()), &mut rec)?;
            }
            self.emit(&format!("profile-n{n}-inv{inv_delta}.records"), &rec)?;
        }
        Ok((path, summary))
    }

    /// Calibration report: length ratios, builder ratios, promise overheads
    /// and the counting constant.
    pub fn report(&self) -> Result<PathBuf, HarnessError> {
        let mut body = String::new();
        writeln!(body, "REPORT machine={} c_star={} k_len={}", self.config.machine_version, self.config.c_star, self.config.k_len).unwrap();
        writeln!(body, "e_const={}", self.table().e_const).unwrap();
        let mut k_len: f64 = 0.0;
        for &n in &self.config.n_values {
            for &inv in &self.config.inv_deltas {
                let chain = self.lab.chain(n, inv)?;
                for level in &chain.levels {
                    let ratio = length_ratio(level);
                    k_len = k_len.max(ratio);
                    writeln!(
                        body,
                        "level n={n} inv_delta={inv} ell={} program_len={} len_ratio={:.4} d_ratio={:.4} m_ratio={:.4}",
                        level.ell(),
                        level.program_len,
                        ratio,
                        level.graph.d_ratio(),
                        level.graph.m_ratio()
                    )
                    .unwrap();
                }
            }
        }
        writeln!(body, "measured k_len={k_len:.4} frozen={}", self.config.k_len).unwrap();
        let mut c_star: i64 = 0;
        for &n in &self.config.n_values {
            for &inv in &self.config.inv_deltas {
                let p = self.profile(n, inv, self.config.c_star)?;
                let cal = p.calibrated_c_star();
                c_star = c_star.max(cal.unwrap_or(i64::MAX));
                writeln!(
                    body,
                    "calibration n={n} inv_delta={inv} min_c_star={} worst_at_frozen={} pass={}",
                    cal.map_or("none".to_string(), |c| c.to_string()),
                    render_probability(p.worst(), p.total(), false),
                    p.pass() as u8
                )
                .unwrap();
            }
        }
        writeln!(body, "measured c_star={c_star} frozen={} cap={}", self.config.c_star, c_star_cap(8, 4)).unwrap();
        let mut k_6: f64 = 0.0;
        for &n in &self.config.n_values {
            for &inv in &self.config.inv_deltas {
                let mut overhead = 0;
                for x in 0..(1u64 << n) {
                    let c = self.table().c(n, x);
                    let run = self.lab.short_program_given_c(x, n, c, inv, 0)?;
                    overhead = overhead.max(run.program.len() as i64 - c as i64);
                }
                let scale = ((n as f64) * inv as f64).log2().powi(2);
                k_6 = k_6.max(overhead as f64 / scale);
                writeln!(body, "promise n={n} inv_delta={inv} max_overhead={overhead} ratio={:.4}", overhead as f64 / scale).unwrap();
            }
        }
        writeln!(body, "measured k_6={k_6:.4}").unwrap();
        let k_ch = chaitin_constant(&self.lab.machine, self.table(), 10, 6)?;
        writeln!(body, "measured k_ch={}", render(&k_ch)).unwrap();
        self.emit("report.txt", body.as_bytes())
    }

    pub fn extractor_search(&self, n: u32, k: u32, eps: Rational, seed: u64, sampled: Option<u64>) -> Result<ExtractorInstance, HarnessError> {
        let params = SearchParams {
            a_d: self.config.a_d,
            a_m: self.config.a_m,
            retries: self.config.retries,
            exact_budget: self.config.exact_budget,
            sampled_trials: sampled,
            ..SearchParams::new(n, k, eps)
        };
        Ok(search_extractor(&params, seed)?)
    }

    pub fn write_extractor_file(&self, e: &ExtractorInstance, name: &str) -> Result<PathBuf, HarnessError> {
        let mut body = Vec::new();
        write_extractor(e, &mut body)?;
        self.emit(name, &body)
    }
}

/// Reads an extractor file (provenance lines are comments and are skipped).
pub fn load_extractor(path: &Path) -> Result<ExtractorInstance, HarnessError> {
    Ok(read_extractor(BufReader::new(fs::File::open(path)?))?)
}

/// Exact verification of a stored instance.
pub fn verify_file(path: &Path, budget: u64) -> Result<(ExtractorInstance, Verification), HarnessError> {
    let mut e = load_extractor(path)?;
    let v = verify_exact(&mut e, budget)?;
    Ok((e, v))
}

/// Sampled audit of a stored instance; the status is not upgraded.
pub fn audit_file(path: &Path, trials: u64, seed: u64) -> Result<(ExtractorInstance, SampledAudit), HarnessError> {
    let e = load_extractor(path)?;
    let a = audit_sampled(&e, trials, seed);
    Ok((e, a))
}

/// `max |oracle(x, c)| / 2^c` over `|x| ≤ max_len`, `c ≤ max_c`.
pub fn chaitin_constant(m: &ToyMachine, table: &ComplexityTable, max_len: u32, max_c: u32) -> Result<Rational, HarnessError> {
    let index = ProgramIndex::build(m, (max_len + table.e_const + max_c) as usize, max_len as usize);
    let mut worst = Rational::new(0, 1);
    for len in 0..=max_len {
        for v in 0..(1u64 << len) {
            let x = Bits::from_value(v as u128, len as usize);
            for c in 0..=max_c {
                let count = c_short_oracle(table, &index, &x, c)?.len() as u64;
                worst = worst.max(Rational::new(count, 1 << c));
            }
        }
    }
    Ok(worst)
}

/// The acceptance cap on the frozen overhead: `4·(2 + log2(n·inv_delta))²`.
pub fn c_star_cap(n: u32, inv_delta: u64) -> f64 {
    4.0 * (2.0 + ((n as u64 * inv_delta) as f64).log2()).powi(2)
}

/// Parses `p/q` or an integer for command-line use.
pub fn parse_delta(s: &str) -> Result<u64, HarnessError> {
    let r = parse_rational(s).ok_or_else(|| HarnessError::Argument(format!("not a rational: {s:?}")))?;
    if *r.numer() != 1 || *r.denom() == 0 {
        return Err(HarnessError::Argument(format!("delta must be 1/k, got {s}")));
    }
    Ok(*r.denom())
}

/// Human-readable status word for exit messages.
pub fn status_word(s: &Status) -> String {
    s.to_string()
}
