//! Seeded random streams.
//!
//! Every random decision in the crate draws from ChaCha8 (the 8-round ChaCha
//! stream cipher used as a counter-based generator). A 64-bit seed is
//! expanded to the 256-bit key with `SeedableRng::seed_from_u64`, and
//! independent purposes use distinct 64-bit stream ids on the same key, so
//! e.g. the graph of an instance does not depend on how many numbers an
//! unrelated component consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub mod streams {
    pub const SET_COVER: u64 = 1;
    pub const COMB_AUCTION: u64 = 2;
    /// Shared by the independent-set and vertex-cover generators.
    pub const GRAPH: u64 = 3;
    pub const ENGINE: u64 = 16;
    pub const COLLECT: u64 = 17;
    pub const WEIGHTS: u64 = 18;
}

/// Generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
