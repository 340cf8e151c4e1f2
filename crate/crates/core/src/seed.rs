//! Counter-based seed derivation and the crate's RNG type.
//!
//! Every random quantity in a simulation is drawn from a stream whose seed
//! is a pure function of `(master, stream, index)`, so any single frame or
//! trial can be replayed in isolation and results do not depend on how work
//! is split between threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Stream tags used across the crate.
pub mod stream {
    pub const PAYLOAD: u64 = 1;
    pub const ENCODER: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const FROZEN: u64 = 4;
    pub const SOURCE_TRIAL: u64 = 5;
    pub const CHANNEL_TRIAL: u64 = 6;
    pub const PROBE: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

pub fn rng_for(master: u64, stream: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, stream, index))
}
