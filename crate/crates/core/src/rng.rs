//! Reproducible random streams.
//!
//! Each replicate draws from its own ChaCha8 stream keyed by
//! `(seed, stream_index)`. ChaCha is counter based, so streams with distinct
//! indices never overlap and results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Independent stream number `index` under `seed`.
pub fn derive_stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
