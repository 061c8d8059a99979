//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a [`Stream`], a SplitMix64
//! generator (Steele, Lea & Flood; constants `0x9E3779B97F4A7C15`,
//! `0xBF58476D1CE4E5B9`, `0x94D049BB133111EB`). Streams are keyed by
//! `(base_seed, purpose, index)` through [`derive_seed`], so a trial's draws do
//! not depend on which worker runs it or on how many trials run alongside it.
//!
//! Integer and real draws are defined here rather than through `rand`'s
//! distribution code so the exact sequence is pinned by this file alone.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream purposes. Values are part of the reproducibility contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Channel = 1,
    Erasure = 2,
    Coefficients = 3,
    Payload = 4,
    Verify = 5,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `(base, purpose, index)`.
pub fn derive_seed(base: u64, purpose: Purpose, index: u64) -> u64 {
    let a = mix64(base.wrapping_add(GOLDEN.wrapping_mul(purpose as u64)));
    mix64(a ^ index.wrapping_add(1).wrapping_mul(GOLDEN))
}

#[derive(Debug, Clone)]
pub struct Stream {
    inner: SplitMix64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn derived(base: u64, purpose: Purpose, index: u64) -> Self {
        Self::new(derive_seed(base, purpose, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `[0, n)`, unbiased by rejection. `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        if n.is_power_of_two() {
            return self.next_u64() & (n - 1);
        }
        // reject the top partial block so every residue has equal weight
        let zone = u64::MAX - (u64::MAX % n) - 1;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    /// Uniform real in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
}
