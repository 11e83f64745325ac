//! Seeded random streams.
//!
//! Every parallel unit of work (a GG pass, a CTS candidate, a slot) draws from
//! its own ChaCha stream derived from `(seed, domain, index)`, so results do not
//! depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a seed with a domain tag and an index into a new 64-bit seed.
pub fn derive_seed(seed: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ domain) ^ index)
}

pub fn stream(seed: u64, domain: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, domain, index))
}

// Domain tags.
pub(crate) const GG_PASS: u64 = 0x4747;
pub(crate) const CTS_INIT: u64 = 0xC751;
pub(crate) const CTS_TABU: u64 = 0xC752;
pub(crate) const ZOBRIST: u64 = 0x2B;
pub(crate) const GLOBAL: u64 = 0x61;
pub(crate) const RANDOM: u64 = 0x52;
pub(crate) const RECOLOR: u64 = 0x5245;
pub(crate) const SLOT: u64 = 0x510;
pub(crate) const SUBGRAPH: u64 = 0x5B;
