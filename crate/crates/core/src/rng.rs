//! Seeded RNG plumbing shared across the crate.
//!
//! Every randomized routine in this library takes an explicit `u64` seed and
//! expands it through ChaCha8. Sub-streams (per trial, per restart) reuse the
//! same seed with a distinct ChaCha stream index, so results never depend on
//! thread count or scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for sub-task `index` under a master `seed`.
pub(crate) fn derived(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Uniform draw from `0..bound` by rejection (no modulo bias).
pub(crate) fn below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    if bound == 1 {
        return 0;
    }
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// Fisher–Yates shuffle with the draw order fixed by this crate (descending
/// index, swap with `below(i + 1)`).
pub(crate) fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_is_unbiased_over_small_bound() {
        let mut rng = seeded(7);
        let mut counts = [0u32; 3];
        for _ in 0..30_000 {
            counts[below(&mut rng, 3) as usize] += 1;
        }
        for &c in &counts {
            assert!((c as i64 - 10_000).abs() < 600, "count {c} too far from uniform");
        }
    }

    #[test]
    fn derived_streams_differ() {
        let a = derived(1, 0).next_u64();
        let b = derived(1, 1).next_u64();
        assert_ne!(a, b);
    }

    #[test]
    fn shuffle_is_reproducible() {
        let mut v1: Vec<u32> = (0..20).collect();
        let mut v2 = v1.clone();
        shuffle(&mut seeded(42), &mut v1);
        shuffle(&mut seeded(42), &mut v2);
        assert_eq!(v1, v2);
        let mut sorted = v1.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }
}
