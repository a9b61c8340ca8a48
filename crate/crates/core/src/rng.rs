//! Counter-based random streams.
//!
//! Every random draw is addressed by `(seed, domain, index)`; the triple is
//! hashed with SplitMix64 into a ChaCha8 key, so a path's variates do not
//! depend on which worker produces them or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains, kept distinct so that e.g. path noise and particle noise
/// never share a key.
pub mod domain {
    pub const PATH: u64 = 0x5041_5448;
    pub const PARTICLE: u64 = 0x5041_5254;
    pub const RESAMPLE: u64 = 0x5245_5341;
    pub const LLOYD: u64 = 0x4c4c_4f59;
    pub const SWEEP: u64 = 0x5357_4550;
    pub const PROBE: u64 = 0x5052_4f42;
    pub const ORACLE: u64 = 0x4f52_4143;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with a sequence of counters into a new 64-bit seed.
pub fn derive(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(seed), |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// Independent generator for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    let mut h = derive(seed, &[domain, index]);
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&h.to_le_bytes());
        h = splitmix64(h);
    }
    ChaCha8Rng::from_seed(key)
}
