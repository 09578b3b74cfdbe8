//! Named deterministic random streams.
//!
//! Every stochastic choice in the simulator draws from a `ChaCha8` stream
//! keyed by the master seed plus a domain tag and the integer coordinates
//! of the event (round, vehicle, RSU, TTI, ...). Streams for different
//! coordinates are independent, so evaluation order never changes results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keeping unrelated streams apart.
pub mod tag {
    pub const TRACE: u64 = 0x01;
    pub const SELECT: u64 = 0x02;
    pub const SHADOW: u64 = 0x03;
    pub const FADING: u64 = 0x04;
    pub const MODEL_INIT: u64 = 0x05;
    pub const TRAIN: u64 = 0x06;
    pub const SUBSAMPLE: u64 = 0x07;
    pub const EXTRACT: u64 = 0x08;
    pub const PROFILE: u64 = 0x09;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapse a master seed plus event coordinates into one 64-bit key.
pub fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut acc = splitmix64(seed ^ 0x6c62_272e_07bb_0142);
    for &p in parts {
        acc = splitmix64(acc ^ splitmix64(p));
    }
    acc
}

/// A fresh stream for the event identified by `parts`.
pub fn stream(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, parts))
}
