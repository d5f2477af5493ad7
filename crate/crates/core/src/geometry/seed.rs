use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Increment of the SplitMix64 generator (golden-ratio gamma).
const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Instance id reserved for class-level draws (parameter sampling).
pub const CLASS_LEVEL: u64 = u64::MAX;

/// Stream tags separating independent random draws made for the same
/// (class, instance) pair.
pub mod stream {
    pub const CLASS_PARAMS: u64 = 1;
    pub const INSTANCE: u64 = 2;
    pub const CENTER: u64 = 3;
    pub const NOISE: u64 = 4;
    pub const CORRUPTION: u64 = 5;
    pub const CHAOS: u64 = 6;
    pub const JITTER: u64 = 7;
    pub const VIEWPOINTS: u64 = 8;
    pub const LINES: u64 = 9;
    pub const PERMUTATION: u64 = 10;
    pub const GRADIENT: u64 = 11;
}

/// One step of SplitMix64: advance by the gamma, then apply the
/// Stafford variant-13 finalizer.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A 64-bit seed. Every random draw in the toolkit starts from one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    pub fn value(self) -> u64 {
        self.0
    }

    /// Seed for sub-stream `tag` of item `index` below this seed.
    pub fn child(self, index: u64, tag: u64) -> Seed {
        derive_seed(self.0, 0, index, tag)
    }

    /// Portable, value-stable generator for this seed.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Chained SplitMix64 over `(global_seed, class_id, instance_id, stream_tag)`.
///
/// Each stage is a bijection of the running state xor-ed with the next id,
/// so for a fixed prefix distinct final ids never collide.
pub fn derive_seed(global_seed: u64, class_id: u64, instance_id: u64, stream_tag: u64) -> Seed {
    let mut h = splitmix64(global_seed);
    h = splitmix64(h ^ class_id);
    h = splitmix64(h ^ instance_id);
    Seed(splitmix64(h ^ stream_tag))
}
