//! Deterministic seed derivation for parallel work units.
//!
//! Every randomized step draws from its own stream, derived from the master
//! seed and the indices that identify the work unit (fold, feature,
//! repetition, ...). Results are therefore independent of worker count and
//! scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep streams for unrelated purposes disjoint.
pub const TAG_SPLIT: u64 = 0x01;
pub const TAG_FIT: u64 = 0x02;
pub const TAG_PFI: u64 = 0x03;
pub const TAG_SUBSAMPLE: u64 = 0x04;
pub const TAG_TREE: u64 = 0x05;
pub const TAG_SIM: u64 = 0x06;
pub const TAG_BENCH: u64 = 0x07;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed by mixing a counter through a 64-bit hash.
pub fn derive(seed: u64, counter: u64) -> u64 {
    splitmix64(seed ^ splitmix64(counter))
}

/// Derive a seed for a nested work unit, e.g. `[TAG_PFI, fold, feature, rep]`.
pub fn derive_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &c| derive(s, c))
}

/// Deterministic RNG for a derived seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
