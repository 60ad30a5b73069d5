//! Seeded, splittable random streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream keyed by the run
//! seed and selected by a `(purpose, index)` pair, so independent consumers
//! never share state and adding draws to one never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// What a stream is used for. The discriminant becomes the high half of the
/// ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Purpose {
    Sampling = 1,
    NetInit = 2,
    Exploration = 3,
    Replay = 4,
    TrainEpisode = 5,
    EvalEpisode = 6,
    Bootstrap = 7,
    Policy = 8,
}

/// A stream for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u32) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | index as u64);
    rng
}
