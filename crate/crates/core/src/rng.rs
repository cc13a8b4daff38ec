//! Seeded random streams.
//!
//! Every consumer of randomness draws from its own ChaCha8 stream, selected
//! by a domain tag and an index (trace number, round, repetition). Results
//! therefore do not depend on the order in which streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum Domain {
    Key = 1,
    Plaintext = 2,
    Noise = 3,
    WrongPrefix = 4,
    Experiment = 5,
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (domain as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(index);
    rng
}

/// SplitMix64, used only for the published bit permutation so that other
/// implementations can regenerate it from the constant seed alone.
pub(crate) struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
}
