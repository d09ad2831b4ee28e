//! Seeded random streams.
//!
//! Every Monte Carlo draw `i` is generated from its own ChaCha8 stream
//! `(seed, i)`, so the values produced never depend on how the work is
//! split into chunks or on how many threads execute it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for all stochastic operations.
pub type StreamRng = ChaCha8Rng;

/// Returns the generator for draw `index` of the run seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
