//! Seed derivation. Every random stream is a function of logical indices
//! (master seed, iteration, purpose), never of call order, so results do not
//! depend on how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::annotated::Domain;

/// Stream purposes. The discriminants are part of the on-disk contract: changing
/// them changes every generated artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Subsample = 1,
    PairSource = 2,
    PairTarget = 3,
    /// Pastes whose destination is the source image.
    IntoSource = 4,
    /// Pastes whose destination is the target image.
    IntoTarget = 5,
}

impl Stream {
    pub fn pastes_into(destination: Domain) -> Stream {
        match destination {
            Domain::Source => Stream::IntoSource,
            Domain::Target => Stream::IntoTarget,
        }
    }
}

// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit hash of `(master, index, stream)`.
pub fn derive_seed(master: u64, index: u64, stream: Stream) -> u64 {
    mix(mix(mix(master) ^ index) ^ stream as u64)
}

pub fn stream_rng(master: u64, index: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, index, stream))
}
