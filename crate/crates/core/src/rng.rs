//! Seeded randomness. Every random choice in the crate goes through here so
//! that a run is a pure function of its seed.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Random rationals are dyadic with this many bits below the unit.
pub const DYADIC_BITS: u32 = 20;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream for a named sub-task.
pub fn split(seed: u64, label: &str) -> SeededRng {
    // FNV-1a over the label, mixed with the parent seed.
    let mut h: u64 = 0xcbf29ce484222325 ^ seed;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// `lo + (hi - lo) * k / 2^20` for uniform `k` in `0..=2^20`.
pub fn dyadic(rng: &mut SeededRng, lo: &BigRational, hi: &BigRational) -> BigRational {
    let k: u32 = rng.random_range(0..=(1u32 << DYADIC_BITS));
    let frac = BigRational::new(BigInt::from(k), BigInt::from(1u64 << DYADIC_BITS));
    lo + (hi - lo) * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let lo = BigRational::from_integer((-1).into());
        let hi = BigRational::from_integer(1.into());
        let draw = |seed| {
            let mut r = seeded(seed);
            (0..5).map(|_| dyadic(&mut r, &lo, &hi)).collect::<Vec<_>>()
        };
        let (a, b) = (draw(7), draw(7));
        assert_eq!(a, b);
        assert!(a.iter().all(|q| q >= &lo && q <= &hi));
    }
}
