//! Seeded random streams.
//!
//! All randomness in the crate comes from ChaCha8 (`rand_chacha`), whose output is
//! fixed by its seed on every platform. Independent substreams of one seed use
//! ChaCha's stream counter, so draws from different substreams never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type PearlRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> PearlRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream `stream` of the generator seeded with `seed`.
pub fn substream(seed: u64, stream: u64) -> PearlRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed derived from a tuple of integers.
pub fn derive_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x5_EA21u64, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn standard_normal(rng: &mut PearlRng) -> f64 {
    StandardNormal.sample(rng)
}
