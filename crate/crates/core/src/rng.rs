//! Seeded randomness. Every stochastic routine takes an explicit seed.

use num_bigint::BigInt;
use num_traits::Signed;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::Rational;

#[derive(Debug, Clone)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `0..n` without modulo bias. Panics on `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl Rng {
    /// Index drawn with probability proportional to `weights` (negative
    /// weights count as zero). The draw is a 53-bit dyadic rational, so the
    /// comparison against the cumulative weights is exact. `None` when every
    /// weight is zero.
    pub fn pick(&mut self, weights: &[Rational]) -> Option<usize> {
        let total: Rational = weights.iter().filter(|w| w.is_positive()).sum();
        if !total.is_positive() {
            return None;
        }
        let u = Rational::new(
            BigInt::from(self.next_u64() >> 11),
            BigInt::from(1u64 << 53),
        ) * &total;
        let mut acc = Rational::from_integer(BigInt::from(0));
        let mut last = None;
        for (i, w) in weights.iter().enumerate() {
            if !w.is_positive() {
                continue;
            }
            acc += w;
            last = Some(i);
            if u < acc {
                return Some(i);
            }
        }
        last
    }
}

/// SplitMix64 step; derives independent child seeds from a parent seed.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    let mut z = parent.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
