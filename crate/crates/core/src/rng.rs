//! Deterministic RNG streams.
//!
//! Every randomized step (dataset shuffle, fold assignment, bootstrap,
//! per-epoch row order) draws from a ChaCha stream whose seed is derived
//! from a user seed plus a fixed purpose tag and an index. Derivation is
//! pure arithmetic, so results never depend on thread count or call
//! interleaving.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Purpose tags keep independent streams from colliding when the same
/// user seed feeds several components.
#[derive(Debug, Clone, Copy)]
pub enum Purpose {
    DatasetShuffle,
    FoldAssignment,
    BootstrapTree,
    FeatureSubsets,
    EpochOrder,
    Synthesis,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::DatasetShuffle => 0x5348_5546_464c_4531,
            Purpose::FoldAssignment => 0x464f_4c44_4153_4e32,
            Purpose::BootstrapTree => 0x424f_4f54_5452_4533,
            Purpose::FeatureSubsets => 0x4645_4154_5355_4234,
            Purpose::EpochOrder => 0x4550_4f43_4852_4435,
            Purpose::Synthesis => 0x5359_4e54_4845_5336,
        }
    }
}

/// splitmix64 finalizer; good avalanche for seed mixing.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `(seed, purpose, index)`.
pub fn derive_seed(seed: u64, purpose: Purpose, index: u64) -> u64 {
    mix(mix(seed ^ purpose.tag()).wrapping_add(index))
}

/// A ChaCha generator for the derived stream.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(derive_seed(seed, purpose, index))
}
