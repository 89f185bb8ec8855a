//! Small-prime utilities for the modular hashing step.

/// Upper bound on the `t`-th prime (Rosser's bound for `t ≥ 6`).
fn nth_prime_bound(t: usize) -> usize {
    if t < 6 {
        return 13;
    }
    let t = t as f64;
    (t * (t.ln() + t.ln().ln())).floor() as usize + 1
}

/// Primes `≤ limit`, ascending (sieve of Eratosthenes).
pub fn primes_up_to(limit: usize) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// The first `t` primes, ascending.
pub fn first_primes(t: usize) -> Vec<u64> {
    assert!(t >= 1, "need at least one prime");
    let mut limit = nth_prime_bound(t);
    loop {
        let mut ps = primes_up_to(limit);
        if ps.len() >= t {
            ps.truncate(t);
            return ps;
        }
        limit *= 2;
    }
}

/// Number of primes `≤ x`.
pub fn prime_count(x: u64) -> usize {
    primes_up_to(x as usize).len()
}

/// Trial division, independent of the sieve.
pub fn is_prime(v: u64) -> bool {
    if v < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= v {
        if v.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
