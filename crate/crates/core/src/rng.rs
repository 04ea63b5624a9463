//! Deterministic random-stream splitting.
//!
//! Every random quantity in an experiment comes from a ChaCha8 generator
//! seeded by [`stream_seed`], a SplitMix64-style hash of the experiment seed
//! and a list of coordinates. Sequences use `(SEQUENCE, variant, N, k)`,
//! shots use `(SHOT, variant, N, k, shot)` and bootstrap resamples use
//! `(BOOTSTRAP, index)`. Streams are independent of execution order, so serial
//! and parallel runs produce identical data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DOMAIN_SEQUENCE: u64 = 0x5345_5155_454e_4345;
pub const DOMAIN_SHOT: u64 = 0x5348_4f54_5348_4f54;
pub const DOMAIN_BOOTSTRAP: u64 = 0x424f_4f54_5354_5250;

pub type StreamRng = ChaCha8Rng;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash the seed and coordinates into one 64-bit stream seed.
pub fn stream_seed(seed: u64, coordinates: &[u64]) -> u64 {
    let mut h = mix(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    for &c in coordinates {
        h = mix(h ^ mix(c.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

pub fn stream(seed: u64, coordinates: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, coordinates))
}
