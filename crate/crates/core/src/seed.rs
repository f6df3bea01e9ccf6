//! Seed derivation for reproducible, schedule-independent randomness.
//!
//! Batch stages (per-frame perturbation, per-record corruption) each get an
//! RNG seeded from `derive_seed(root, &[stream ids...])`, so parallel
//! execution is bit-identical to serial regardless of thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One round of the splitmix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `root` and an ordered list of stream ids.
///
/// The fold is positional: `&[a, b]` and `&[b, a]` yield different seeds.
pub fn derive_seed(root: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(root);
    for &part in parts {
        state = splitmix64(state ^ part);
    }
    state
}

/// A ChaCha8 stream for the given root seed and stream ids.
pub fn derived_rng(root: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, parts))
}
