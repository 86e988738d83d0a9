//! Seeded, counter-based random streams.
//!
//! Every replication gets its own ChaCha stream derived from the master seed,
//! so parallel runs never share randomness and results do not depend on the
//! order in which replications are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// What a stream is used for. Separate purposes get disjoint streams so
/// that, e.g., adding learner randomness never perturbs the data stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Environment = 0,
    Learner = 1,
    Evaluation = 2,
}

/// Stream for `(seed, replication, purpose)`.
pub fn substream(seed: u64, replication: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replication << 8) | purpose as u64);
    rng
}
