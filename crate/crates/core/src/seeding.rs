//! Deterministic seed derivation.
//!
//! Every random quantity in the library (sensing operator, signal, noise) is
//! drawn from a ChaCha8 stream whose seed is derived from a single master
//! seed by a fixed rule, so a run is reproducible bit-for-bit regardless of
//! trial scheduling order:
//!
//! * per-trial seed: `derive(master, trial_index)`
//! * per-role stream: `ChaCha8Rng::seed_from_u64(seed)` with the role tag as
//!   the ChaCha stream number.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed tags naming what a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedRole {
    /// Sensing-operator structure (row selection, permutation, signs).
    Operator = 1,
    /// Sparse signal supports and amplitudes.
    Signal = 2,
    /// Additive measurement noise.
    Noise = 3,
}

/// SplitMix64 finalizer; decorrelates nearby seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a sub-seed from a master seed and an integer tag.
pub fn derive(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag.wrapping_add(1)))
}

/// Returns the RNG stream for `role` under `seed`.
pub fn role_rng(seed: u64, role: SeedRole) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derive_is_deterministic_and_tag_sensitive() {
        assert_eq!(derive(7, 0), derive(7, 0));
        assert_ne!(derive(7, 0), derive(7, 1));
        assert_ne!(derive(7, 0), derive(8, 0));
    }

    #[test]
    fn roles_yield_distinct_streams() {
        let a = role_rng(42, SeedRole::Operator).next_u64();
        let b = role_rng(42, SeedRole::Signal).next_u64();
        let c = role_rng(42, SeedRole::Noise).next_u64();
        assert_ne!(a, b);
        assert_ne!(b, c);
    }
}
