use std::sync::OnceLock;

use proptest::prelude::*;

use shortlist::bigraph::LeftSubset;
use shortlist::extractor::{
    audit_rich_bound, audit_sampled, avg_right_degree, read_extractor, search_extractor, tv_deviation, verify_exact,
    verify_exact_on, write_extractor, ExtractorInstance, FlatSource, SearchParams, Status, DEFAULT_EXACT_BUDGET,
};
use shortlist::ratio::Rational;
use shortlist::rng::SplitMix64;

/// Every `(n, k, ε)` with `n ≤ 6` whose exact verification fits the default budget.
fn tiny_suite() -> &'static [ExtractorInstance] {
    static SUITE: OnceLock<Vec<ExtractorInstance>> = OnceLock::new();
    SUITE.get_or_init(|| {
        let mut out = Vec::new();
        for (n, k) in [(3, 1), (3, 2), (4, 1), (4, 2), (4, 3), (5, 1), (5, 2), (6, 1), (6, 2)] {
            for eps in [Rational::new(1, 2), Rational::new(1, 4)] {
                let mut p = SearchParams::new(n, k, eps);
                p.sampled_trials = None;
                let e = search_extractor(&p, 11).unwrap();
                assert!(e.is_exact_verified(), "n={n} k={k} eps={eps}");
                out.push(e);
            }
        }
        out
    })
}

#[test]
fn tiny_suite_is_exactly_verified_with_formula_lengths() {
    for e in tiny_suite() {
        let mut p = SearchParams::new(e.n, e.k, e.epsilon);
        p.sampled_trials = None;
        assert_eq!(e.d, p.seed_length());
        assert_eq!(e.m, p.output_length().unwrap());
        let mut copy = e.clone();
        let v = verify_exact(&mut copy, DEFAULT_EXACT_BUDGET).unwrap();
        assert!(v.verified && v.worst < e.epsilon);
    }
}

#[test]
fn restricting_the_domain_preserves_verification() {
    // flat sources inside a subset are flat sources of the whole domain
    let mut rng = SplitMix64::new(5);
    for e in tiny_suite().iter().filter(|e| e.n <= 5) {
        let full = verify_exact_on(e, &LeftSubset::full(e.n), DEFAULT_EXACT_BUDGET).unwrap();
        for _ in 0..4 {
            let size = (1usize << e.k) + rng.below((1u64 << e.n) - (1 << e.k) + 1) as usize;
            let sub = LeftSubset::new(e.n, rng.sample_distinct(1 << e.n, size)).unwrap();
            let part = verify_exact_on(e, &sub, DEFAULT_EXACT_BUDGET).unwrap();
            assert!(part.verified);
            assert!(part.worst <= full.worst);
        }
    }
}

#[test]
fn rich_bound_on_every_tested_set() {
    let mut rng = SplitMix64::new(21);
    let mut checked = 0;
    for e in tiny_suite() {
        let g = e.graph();
        let size_n = 1u64 << e.n;
        let mut sets = vec![LeftSubset::full(e.n)];
        for _ in 0..12 {
            let size = 1 + rng.below(size_n) as usize;
            sets.push(LeftSubset::new(e.n, rng.sample_distinct(size_n, size)).unwrap());
        }
        for b in &sets {
            let avg = avg_right_degree(&g, b);
            for a in [avg, avg * 2] {
                let audit = audit_rich_bound(e, &a, b).unwrap();
                assert!(
                    audit.count() as u64 <= 1 << e.k,
                    "n={} k={} eps={} |B|={} a={a}: {} offenders",
                    e.n,
                    e.k,
                    e.epsilon,
                    b.len(),
                    audit.count()
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, tiny_suite().len() * 13 * 2);
}

#[test]
fn sampled_audit_is_bounded_by_exact_and_reproducible() {
    for e in tiny_suite().iter().take(6) {
        let mut copy = e.clone();
        let exact = verify_exact(&mut copy, DEFAULT_EXACT_BUDGET).unwrap();
        let a = audit_sampled(e, 300, 9);
        assert!(a.worst <= exact.worst);
        assert_eq!(a, audit_sampled(e, 300, 9));
        assert_eq!(tv_deviation(e, &a.witness).unwrap(), a.worst);
    }
    // the reproducibility example at a size beyond exact enumeration
    let e = ExtractorInstance::random(6, 3, 4, 5, Rational::new(1, 2), 3).unwrap();
    let first = audit_sampled(&e, 10_000, 42);
    assert_eq!(first, audit_sampled(&e, 10_000, 42));
    assert!(matches!(e.status, Status::Unverified));
}

#[test]
fn shipped_fixtures_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let text = std::fs::read(dir.join("extractor-n4-k2.txt")).unwrap();
    let e = read_extractor(text.as_slice()).unwrap();
    assert_eq!((e.n, e.k, e.d, e.m), (4, 2, 5, 3));
    assert!(e.is_exact_verified());
    let mut written = Vec::new();
    write_extractor(&e, &mut written).unwrap();
    assert_eq!(written, text);

    let text = std::fs::read(dir.join("extractor-constant.txt")).unwrap();
    let mut c = read_extractor(text.as_slice()).unwrap();
    let v = verify_exact(&mut c, DEFAULT_EXACT_BUDGET).unwrap();
    assert!(!v.verified);
    assert_eq!(v.worst, Rational::new(1, 2));
}

fn arb_instance() -> impl Strategy<Value = ExtractorInstance> {
    (1u32..=5, 0u32..=4, 0u32..=4, any::<u64>(), 1u64..=4).prop_map(|(n, d, m, seed, q)| {
        let k = seed as u32 % (n + 1);
        // outputs cannot carry more than the source and seed entropy
        let m = m.min(k + d);
        ExtractorInstance::random(n, k, d, m, Rational::new(1, q), seed).unwrap()
    })
}

proptest! {
    #[test]
    fn files_round_trip_bit_identically(e in arb_instance()) {
        let mut buf = Vec::new();
        write_extractor(&e, &mut buf).unwrap();
        let back = read_extractor(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &e);
        let mut again = Vec::new();
        write_extractor(&back, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn deviation_lies_in_the_unit_interval(e in arb_instance(), pick in any::<u64>()) {
        let mut rng = SplitMix64::new(pick);
        let support = rng.sample_distinct(1 << e.n, 1 << e.k);
        let x = FlatSource::new(LeftSubset::new(e.n, support).unwrap()).unwrap();
        let dev = tv_deviation(&e, &x).unwrap();
        prop_assert!(dev < Rational::new(1, 1));
        // never worse than a point mass
        prop_assert!(dev <= Rational::new((1u64 << e.m) - 1, 1u64 << e.m));
    }

    #[test]
    fn search_is_deterministic(n in 2u32..=4, seed in any::<u64>()) {
        let mut p = SearchParams::new(n, 1, Rational::new(1, 2));
        p.sampled_trials = None;
        let a = search_extractor(&p, seed);
        let b = search_extractor(&p, seed);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            _ => prop_assert!(false, "outcomes differ"),
        }
    }
}
