//! Seeded generators. Each consumer draws from its own ChaCha stream so that
//! changing one component's draw count never shifts another's sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

pub mod stream {
    pub const DATASET: u64 = 1;
    pub const QGA: u64 = 2;
    pub const LOOP: u64 = 3;
    pub const SURROGATE: u64 = 4;
    pub const CGA: u64 = 5;
    pub const STUDY: u64 = 6;
}

pub fn seeded(seed: u64, stream: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer, for deriving child seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
