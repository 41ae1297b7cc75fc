//! Reproducible random-number streams.
//!
//! All stochastic code in this crate draws from [`SimRng`] (ChaCha12, a
//! counter-based generator with a stable cross-platform output stream).
//! Parallel replicates and multi-start runs each get an independent stream
//! whose seed is derived from the user seed with [`derive_seed`], so results
//! are identical regardless of scheduling or thread count.

use rand_chacha::ChaCha12Rng;

/// The simulation generator used everywhere in this crate.
pub type SimRng = ChaCha12Rng;

/// SplitMix64 finalizer; a bijective mix with good avalanche behavior.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive the seed for an indexed stream (replicate, multi-start run, ...)
/// from a base seed. Distinct `stream` values give decorrelated generators;
/// the map is deterministic so reruns reproduce every stream exactly.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream))
}

/// Construct the generator for a given derived seed.
pub fn make_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derived_seeds_are_deterministic() {
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
        assert_ne!(derive_seed(42, 7), derive_seed(42, 8));
        assert_ne!(derive_seed(42, 7), derive_seed(43, 7));
    }

    #[test]
    fn streams_do_not_collide_for_small_indices() {
        let mut seen = std::collections::HashSet::new();
        for r in 0..10_000u64 {
            assert!(seen.insert(derive_seed(0, r)));
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = make_rng(derive_seed(1, 2));
        let mut b = make_rng(derive_seed(1, 2));
        for _ in 0..32 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
