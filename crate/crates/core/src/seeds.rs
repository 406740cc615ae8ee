//! Deterministic seed derivation.
//!
//! Every random stream in the lab is a ChaCha8 generator whose seed is a
//! SplitMix64-style hash of a master seed and a path of indices. Streams never
//! depend on scheduling, so results are identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `master`, one SplitMix64 round per part.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(master: u64, parts: &[u64]) -> LabRng {
    rng_from_seed(derive_seed(master, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_path_same_stream() {
        let a: Vec<u64> = stream(42, &[16, 0, 1, 7]).sample_iter(rand::distributions::Standard).take(8).collect();
        let b: Vec<u64> = stream(42, &[16, 0, 1, 7]).sample_iter(rand::distributions::Standard).take(8).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn paths_are_order_sensitive() {
        assert_ne!(derive_seed(42, &[1, 2]), derive_seed(42, &[2, 1]));
        assert_ne!(derive_seed(42, &[1]), derive_seed(43, &[1]));
        assert_ne!(derive_seed(42, &[0]), derive_seed(42, &[]));
    }

    #[test]
    fn no_collisions_on_trial_grid() {
        let mut seen = std::collections::HashSet::new();
        for n in (8..=100u64).step_by(4) {
            for mode in 0..2u64 {
                for trial in 0..500u64 {
                    assert!(seen.insert(derive_seed(7, &[n, mode, 0, trial])));
                }
            }
        }
    }
}
