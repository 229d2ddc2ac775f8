//! Deterministic random streams.
//!
//! Every stochastic operation takes an explicit 64-bit seed. Independent
//! consumers (one per sample, one per training phase) get their own ChaCha20
//! stream so results never depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// Stream ids reserved for the training loop.
pub mod tag {
    pub const INIT: u64 = 0x1_0000_0000;
    pub const SHUFFLE: u64 = 0x1_0000_0001;
    pub const CENTERS: u64 = 0x1_0000_0002;
    pub const PAIRS: u64 = 0x2_0000_0000;
}

/// The `id`-th stream of the generator seeded with `seed`.
pub fn stream(seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// SplitMix64 finalizer; derives child seeds from a parent seed.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
