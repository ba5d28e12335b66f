//! Seed derivation. Every episode, trial and GP stream gets its own
//! ChaCha stream keyed by a 64-bit seed mixed from a master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless hash of `(master, stream, index)` to a seed.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

/// Stream tags, so different consumers of one master seed never collide.
pub mod stream {
    pub const TRIALS: u64 = 0x7472_6961_6c73;
    pub const GP_OPERATORS: u64 = 0x6770_6f70;
    pub const FITNESS: u64 = 0x6669_746e;
    pub const SCENARIO: u64 = 0x7363_656e;
}
