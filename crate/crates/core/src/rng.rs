//! The pinned pseudo-random stream used by every randomized step.
//!
//! SplitMix64 with the constants below. The stream is part of the machine
//! version: changing any constant changes every generated extractor table and
//! every derived seed.

pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
pub const MIX_MUL_1: u64 = 0xBF58_476D_1CE4_E5B9;
pub const MIX_MUL_2: u64 = 0x94D0_49BB_1331_11EB;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX_MUL_1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_MUL_2);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a list of integer labels.
pub fn derive_seed(parent: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(mix64(parent ^ GOLDEN_GAMMA), |acc, &l| mix64(acc.wrapping_add(GOLDEN_GAMMA) ^ mix64(l)))
}

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// The top `bits` bits of the next output (`bits` ≤ 64).
    #[inline]
    pub fn next_bits(&mut self, bits: u32) -> u64 {
        match bits {
            0 => 0,
            64 => self.next_u64(),
            b => self.next_u64() >> (64 - b),
        }
    }

    /// Uniform integer in `[0, bound)` by widening multiply with rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let wide = (self.next_u64() as u128) * (bound as u128);
            if (wide as u64) >= threshold {
                return (wide >> 64) as u64;
            }
        }
    }

    /// `count` distinct values from `[0, universe)`, sorted ascending.
    pub fn sample_distinct(&mut self, universe: u64, count: usize) -> Vec<u64> {
        assert!(count as u64 <= universe);
        if (count as u64) * 2 > universe {
            // partial Fisher-Yates over the whole universe
            let mut all: Vec<u64> = (0..universe).collect();
            for i in 0..count {
                let j = i as u64 + self.below(universe - i as u64);
                all.swap(i, j as usize);
            }
            let mut out = all[..count].to_vec();
            out.sort_unstable();
            out
        } else {
            let mut picked = std::collections::BTreeSet::new();
            while picked.len() < count {
                picked.insert(self.below(universe));
            }
            picked.into_iter().collect()
        }
    }
}
