//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use sha2::{Digest, Sha256};

use shortlist::bigraph::{non_rich_members, LeftRegularGraph, LeftSubset};
use shortlist::extractor::{audit_rich_bound, avg_right_degree, search_extractor, SearchParams};
use shortlist::harness::{c_star_cap, chaitin_constant, ExperimentConfig, Harness};
use shortlist::listapprox::{length_ratio, Level};
use shortlist::machine::enumerate_b;
use shortlist::machine::BVariant;
use shortlist::primes::first_primes;
use shortlist::ratio::{render, Rational};
use shortlist::richowner::{collision_fraction, split_graph, SplitParams};
use shortlist::rng::SplitMix64;

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

/// The frozen acceptance configuration shipped with the crate.
fn config() -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/experiment.conf");
    ExperimentConfig::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn harness() -> &'static Harness {
    static H: OnceLock<(tempfile::TempDir, Harness)> = OnceLock::new();
    &H.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig { out_dir: dir.path().to_path_buf(), ..config() };
        let h = Harness::new(cfg).unwrap();
        (dir, h)
    })
    .1
}

const SUITE: [(u32, u64); 6] = [(4, 2), (4, 4), (6, 2), (6, 4), (8, 2), (8, 4)];

fn list_size() -> Result<String, String> {
    let h = harness();
    let mut rng = SplitMix64::new(1);
    let mut lists = 0;
    for (n, inv) in SUITE {
        let chain = h.lab.chain(n, inv).map_err(|e| e.to_string())?;
        for x in 0..(1u64 << n) {
            for _ in 0..3 {
                let seed = rng.below(1 << chain.r);
                let list = chain.generate_list(x, seed).map_err(|e| e.to_string())?;
                ensure!(list.len() == n as usize, "n={n} δ=1/{inv} x={x:#x}: {} entries", list.len());
                lists += 1;
            }
        }
    }
    Ok(format!("{lists} lists, each with exactly n entries"))
}

fn exact_success() -> Result<String, String> {
    let h = harness();
    let c_star = h.config.c_star;
    let p = h.profile(8, 4, c_star).map_err(|e| e.to_string())?;
    let target = Rational::new(3, 4);
    for (x, &hits) in p.hits.iter().enumerate() {
        let prob = Rational::new(hits, p.total());
        ensure!(prob >= target, "x={x:#04x}: {hits}/{} < 3/4", p.total());
    }
    Ok(format!("all 256 strings over 2^{} seeds at c*={c_star}; worst {}/{}", p.r, p.worst(), p.total()))
}

fn overhead_calibration() -> Result<String, String> {
    let h = harness();
    let cap = c_star_cap(8, 4);
    let frozen = h.config.c_star as i64;
    ensure!((frozen as f64) <= cap, "frozen c*={frozen} exceeds {cap}");
    let mut measured = 0;
    for inv in [2, 4] {
        let p = h.profile(8, inv, h.config.c_star).map_err(|e| e.to_string())?;
        let cal = p.calibrated_c_star().ok_or(format!("δ=1/{inv}: no threshold reaches 1 − δ"))?;
        measured = measured.max(cal);
    }
    ensure!(measured == frozen, "calibration moved: measured c*={measured}, frozen {frozen}");
    let mut k_len: f64 = 0.0;
    for (n, inv) in SUITE {
        for level in &h.lab.chain(n, inv).map_err(|e| e.to_string())?.levels {
            k_len = k_len.max(length_ratio(level));
        }
    }
    ensure!(k_len <= h.config.k_len as f64, "K_len {k_len:.4} above frozen {}", h.config.k_len);
    Ok(format!("c*={frozen} (cap {cap}), measured K_len={k_len:.4} ≤ {}", h.config.k_len))
}

fn collision_bound() -> Result<String, String> {
    let mut rng = SplitMix64::new(43);
    let deltas = [Rational::new(1, 2), Rational::new(1, 4), Rational::new(1, 8)];
    let mut checks = 0;
    for instance in 0..1000 {
        let n = 1 + rng.below(32) as u32;
        let s = (1 + rng.below(8)).min(1 << n);
        let delta = deltas[rng.below(3) as usize];
        let params = SplitParams::new(s, n, delta).map_err(|e| e.to_string())?;
        let xs = rng.sample_distinct(1 << n, s as usize);
        for i in 0..xs.len() {
            let f = collision_fraction(&xs, i, &params).map_err(|e| e.to_string())?;
            ensure!(f < delta, "instance {instance}: n={n} s={s} δ={delta} i={i}: fraction {f}");
            checks += 1;
        }
    }
    Ok(format!("1000 instances, {checks} indices, every fraction < δ"))
}

fn random_graph(n: u32, degree: usize, right: u64, rng: &mut SplitMix64) -> LeftRegularGraph {
    let table = (0..(1usize << n) * degree).map(|_| rng.below(right)).collect();
    LeftRegularGraph::from_table(n, degree, right, "random", table).unwrap()
}

fn split_structure() -> Result<String, String> {
    let mut rng = SplitMix64::new(44);
    for i in 0..100 {
        let n = 1 + rng.below(10) as u32;
        let g = random_graph(n, 1 + rng.below(8) as usize, 1 + rng.below(64), &mut rng);
        let params = SplitParams::new(1 + rng.below(4), n, Rational::new(1, 1 << rng.below(4))).map_err(|e| e.to_string())?;
        let h = split_graph(&g, &params).map_err(|e| e.to_string())?;
        ensure!(h.degree() == params.t * g.degree(), "graph {i}: degree {} ≠ {}·{}", h.degree(), params.t, g.degree());
        ensure!(h.right_size() == g.right_size() * params.p_t() * params.p_t(), "graph {i}: right size");
        let x = rng.below(1 << n);
        ensure!(h.neighbors(x).unwrap().len() == h.degree(), "graph {i}: row length");
    }

    let primes = first_primes(100_000);
    for t in 6..=100_000usize {
        let (p, tf) = (primes[t - 1] as f64, t as f64);
        ensure!(p <= tf * tf.ln() + tf * tf.ln().ln(), "p_{t} = {p} above the bound");
    }

    let mut rng = SplitMix64::new(45);
    let deltas = [Rational::new(1, 2), Rational::new(1, 4), Rational::new(1, 8)];
    let (mut rich_checked, mut sets) = (0u64, 0u64);
    for i in 0..100 {
        let n = 4 + rng.below(7) as u32;
        let degree = 1 << (1 + rng.below(3));
        let right = (1u64 << n) * degree as u64 / (1 + rng.below(8));
        let g = random_graph(n, degree, right.max(1), &mut rng);
        let s = 2 + rng.below(3);
        let delta = deltas[rng.below(3) as usize];
        let h = split_graph(&g, &SplitParams::new(s, n, delta).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let size = 1 + rng.below(1 << n) as usize;
            let b = LeftSubset::new(n, rng.sample_distinct(1 << n, size)).unwrap();
            let bad_g = non_rich_members(&g, &b, s as usize, &delta).map_err(|e| e.to_string())?;
            let bad_h = non_rich_members(&h, &b, 2, &(delta * 2)).map_err(|e| e.to_string())?;
            for x in b.iter().filter(|x| bad_g.binary_search(x).is_err()) {
                ensure!(bad_h.binary_search(&x).is_err(), "graph {i}: {x} rich before splitting, not after");
                rich_checked += 1;
            }
            sets += 1;
        }
    }
    Ok(format!(
        "100 degree checks, p_t bound for 6 ≤ t ≤ 10^5, transfer on {sets} sets ({rich_checked} rich nodes)"
    ))
}

fn extractor_richness() -> Result<String, String> {
    let mut rng = SplitMix64::new(46);
    let (mut instances, mut sets) = (0, 0);
    for (n, k) in [(3, 1), (3, 2), (4, 1), (4, 2), (4, 3), (5, 1), (5, 2), (6, 1), (6, 2)] {
        for eps in [Rational::new(1, 2), Rational::new(1, 4)] {
            let mut p = SearchParams::new(n, k, eps);
            p.sampled_trials = None;
            let e = search_extractor(&p, 11).map_err(|e| e.to_string())?;
            ensure!(e.is_exact_verified(), "n={n} k={k} ε={eps} not verified");
            instances += 1;
            let g = e.graph();
            let mut family = vec![LeftSubset::full(n)];
            for _ in 0..20 {
                let size = 1 + rng.below(1 << n) as usize;
                family.push(LeftSubset::new(n, rng.sample_distinct(1 << n, size)).unwrap());
            }
            for b in &family {
                let a = avg_right_degree(&g, b);
                let audit = audit_rich_bound(&e, &a, b).map_err(|e| e.to_string())?;
                ensure!(audit.count() as u64 <= 1 << k, "n={n} k={k} ε={eps} |B|={}: {} offenders", b.len(), audit.count());
                sets += 1;
            }
        }
    }
    Ok(format!("{instances} exact-verified extractors, {sets} sets, offenders ≤ 2^k throughout"))
}

/// Every level of every built chain, plus the plain levels the promise
/// algorithm uses at n = 8.
fn all_levels() -> Result<Vec<(String, std::sync::Arc<dyn AsLevel>)>, String> {
    let h = harness();
    let mut out: Vec<(String, std::sync::Arc<dyn AsLevel>)> = Vec::new();
    for (n, inv) in SUITE.into_iter().chain([(10, 2)]) {
        let chain = h.lab.chain(n, inv).map_err(|e| e.to_string())?;
        for i in 0..chain.levels.len() {
            out.push((format!("chain n={n} δ=1/{inv} ℓ={}", chain.levels[i].ell()), std::sync::Arc::new((chain.clone(), i))));
        }
    }
    for inv in [2, 4] {
        let mut ells: Vec<u32> = (0..256).map(|x| h.table().c(8, x) + 1).collect();
        ells.sort();
        ells.dedup();
        for ell in ells {
            let c = shortlist::listapprox::promise_c(8, ell);
            let level = h.lab.plain_level(8, ell, c, inv).map_err(|e| e.to_string())?;
            out.push((format!("plain n=8 δ=1/{inv} ℓ={ell}"), level));
        }
    }
    Ok(out)
}

trait AsLevel: Send + Sync {
    fn level(&self) -> &Level;
}

impl AsLevel for (std::sync::Arc<shortlist::listapprox::Chain>, usize) {
    fn level(&self) -> &Level {
        &self.0.levels[self.1]
    }
}

impl AsLevel for Level {
    fn level(&self) -> &Level {
        self
    }
}

fn end_to_end_richness() -> Result<String, String> {
    let (mut levels, mut members) = (0, 0);
    for (name, l) in all_levels()? {
        let level = l.level();
        let g = &level.graph;
        let b = level.set.subset();
        let bad = non_rich_members(&g.graph, &b, 2, &(g.epsilon * 4)).map_err(|e| e.to_string())?;
        ensure!(bad.len() as u64 <= 1 << g.k, "{name}: {} of {} not rich, allowance 2^{}", bad.len(), b.len(), g.k);
        ensure!(bad == level.non_rich, "{name}: recount disagrees with the stored audit");
        levels += 1;
        members += b.len();
    }
    Ok(format!("{levels} levels, {members} members audited, non-rich ≤ 2^k everywhere"))
}

fn b_set_bounds() -> Result<String, String> {
    let h = harness();
    let mut sizes = BTreeMap::new();
    for (name, l) in all_levels()? {
        let level = l.level();
        let (ell, size) = (level.ell(), level.set.len() as u64);
        if level.key.augmented {
            ensure!(size <= 1 << ell, "{name}: |B|={size} > 2^{ell}");
            // strings below ℓ − 1, plus non-rich members of the level above
            ensure!((level.set.first_type.len() as u64) < 1 << (ell - 1), "{name}: first type reaches 2^(ℓ−1)");
            ensure!(level.set.second_type.len() as u64 <= 1 << (ell - 1), "{name}: second type above 2^(ℓ−1)");
        } else {
            ensure!(size < 1 << ell, "{name}: |B|={size} ≥ 2^{ell}");
        }
        *sizes.entry(size).or_insert(0) += 1;
    }
    for n in [4, 6, 8, 10] {
        for ell in 0..=n + h.table().e_const + 1 {
            let b = enumerate_b(h.table(), n, ell, BVariant::Plain).map_err(|e| e.to_string())?;
            ensure!((b.len() as u64) < 1 << ell, "plain n={n} ℓ={ell}: {}", b.len());
        }
    }
    Ok(format!("level sizes (size: count) {sizes:?}; plain sets below 2^ℓ for every ℓ"))
}

fn chaitin() -> Result<String, String> {
    let h = harness();
    let k = chaitin_constant(&h.lab.machine, h.table(), 10, 6).map_err(|e| e.to_string())?;
    ensure!(k <= Rational::from_integer(16), "K_ch = {k}");
    Ok(format!("K_ch = {} ≤ 16", render(&k)))
}

fn promise() -> Result<String, String> {
    let h = harness();
    let mut worst = Rational::new(1, 1);
    for x in 0..256 {
        let p = h.lab.promise_profile(x, 8, 4).map_err(|e| e.to_string())?;
        ensure!(!p.in_bad_set, "x={x:#04x} is in the bad set");
        ensure!(p.probability() >= Rational::new(3, 4), "x={x:#04x}: {}", p.probability());
        worst = worst.min(p.probability());
    }
    Ok(format!("256 strings, none in the bad set, worst probability {}", render(&worst)))
}

/// SHA-256 of every file the pipeline writes, frozen on the reference run.
const GOLDEN: &[(&str, &str)] = &[
    ("chain-n8-inv4/chain.summary", "cc6dab3f036976881dad690cac4885f6bff837e768f1cec416158abb38d409cc"),
    ("chain-n8-inv4/level-05.bset", "30d3f637d7fdb7e8f898ec2e1bb9dc31b2b91e52e5e94ed0a80ae972eb5a683f"),
    ("chain-n8-inv4/level-05.manifest", "13534f7b081c361aea5495af96257e4d05916bc325f44013d9d61c1bae230d1a"),
    ("chain-n8-inv4/level-06.bset", "a92e9145a151f98804a04d5e2840905ac6350e6aa2b5e0cec7d51975c74a7c50"),
    ("chain-n8-inv4/level-06.manifest", "3e0d04601e233838c1aeae77ac7a735b164941d488857be9ca5e76f6db41da78"),
    ("chain-n8-inv4/level-07.bset", "d814aef70fd8f21613f48d37532a9d6c83e8da40253ad7ca7e9f8fae21c2b5c2"),
    ("chain-n8-inv4/level-07.manifest", "c0a0b52c970558dd5493bf2b390e27ddf219e4f8dbab74722e5739421c1cfbe2"),
    ("chain-n8-inv4/level-08.bset", "0b95ba8aadafb6f252483b564300c13d5284f2dec3e44862c9685cfa87ee72fd"),
    ("chain-n8-inv4/level-08.manifest", "dd982bc1c5e7a38ab799da066299a280cb9ab7c1445ba94ddd171aeba2e5eb68"),
    ("chain-n8-inv4/level-09.bset", "12771d55baaf9dc9ed389515f39b7aa01ff7302fda19cb40cd85ae72de33e352"),
    ("chain-n8-inv4/level-09.manifest", "b8ece0db18597c12b8636443cfc43614d84d73b0fea738025e8dcdb49db72d54"),
    ("chain-n8-inv4/level-10.bset", "66ab83c036a06aa029d9a4010777e7c37d5db419cac6ccc304a119ebcdcc697d"),
    ("chain-n8-inv4/level-10.manifest", "c4d93131c1e299a7786f698e165a895cfb8714177f6cd13d81a486006a6a7602"),
    ("chain-n8-inv4/level-11.bset", "7e3bbedbb05b6433407bfbd56f1f8ef870c4b2cf1285e8d8d264c490d4568a91"),
    ("chain-n8-inv4/level-11.manifest", "635685dbf9d5702225bb4f732a2cc4ea174e925b8d46bc8128e5849954f124d3"),
    ("chain-n8-inv4/level-12.bset", "0d00ec82da9794b1a62cf6c72e698fd1c9344feea586c9e0f56689b4c120f576"),
    ("chain-n8-inv4/level-12.manifest", "4f4b5c22ab9e628810fe628838f73838eb69fd065c31ec9571c13fd1b3fd7e19"),
    ("ctable-n8.txt", "7f028171c4343de653aaf8209bf60bb6869a7d197d620cd680a270f6c664e6d1"),
    ("list-n8-inv4-xa5-s1234.txt", "23a3e7c077d8621b209c4cf42bc3c7452c840877b73f60ac9d57b526e517ad28"),
    ("machine.txt", "836fe18c4a8da551006c8ee4f51dce48080b2591c43d59f8064c9451fbf990a9"),
    ("profile-n8-inv4.records", "4db744a7556ee4df32227a3f3680187a376ea26fa9976a7caf3c9f66bcb3706e"),
    ("profile-n8-inv4.summary", "8b76c9c52ad8d9214aa54ab82a6e031d32f7b0a8a8c3d06b9f1006a206274b39"),
    ("promise-n8-inv4-xa5-c10-s7.txt", "dd38943b20ad7f2df30726236edb16446ce5c93ec66d759ae7d6d1a6b99ea632"),
];

fn pipeline(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let h = Harness::new(ExperimentConfig { out_dir: dir.to_path_buf(), ..config() }).map_err(|e| e.to_string())?;
    let run = || -> Result<(), shortlist::harness::HarnessError> {
        h.machine_define()?;
        h.machine_table(8)?;
        h.build_chain(8, 4)?;
        h.run_list(8, 0xa5, 4, 0x1234)?;
        h.run_promise(8, 0xa5, h.table().c(8, 0xa5), 4, 7)?;
        h.run_profile(8, 4, h.config.c_star, Some(8), false)?;
        Ok(())
    };
    run().map_err(|e| e.to_string())?;
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let name = path.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/");
                files.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(files)
}

fn determinism() -> Result<String, String> {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path())?;
    let second = pipeline(b.path())?;
    ensure!(first.keys().eq(second.keys()), "different file sets");
    for (name, bytes) in &first {
        ensure!(&second[name] == bytes, "{name} differs between runs");
    }
    let digests: BTreeMap<&str, String> = first.iter().map(|(k, v)| (k.as_str(), hex::encode(Sha256::digest(v)))).collect();
    let golden: BTreeMap<&str, String> = GOLDEN.iter().map(|&(k, v)| (k, v.to_string())).collect();
    if digests != golden {
        let listing: Vec<String> = digests.iter().map(|(k, v)| format!("    (\"{k}\", \"{v}\"),")).collect();
        return Err(format!("golden digests differ; this run produced:\n{}", listing.join("\n")));
    }
    Ok(format!("{} files byte-identical across two runs and equal to the frozen digests", first.len()))
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("list size", list_size),
        ("exact success probability", exact_success),
        ("overhead calibration", overhead_calibration),
        ("prime collisions", collision_bound),
        ("split structure", split_structure),
        ("extractor richness", extractor_richness),
        ("end-to-end richness", end_to_end_richness),
        ("B-set bounds", b_set_bounds),
        ("Chaitin counting", chaitin),
        ("promise algorithm", promise),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({secs:.1}s) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
