//! Seeded random number generation.
//!
//! Everything stochastic in the crate draws from [`ChaCha8Rng`], whose output
//! stream is fixed across platforms and crate releases for a given seed.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Deterministic generator for `seed`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream from a base seed and a stream label.
///
/// Used where one experiment seed fans out into several generators (network
/// init, episode sampling, action sampling) that must not share draws.
pub fn derived_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
