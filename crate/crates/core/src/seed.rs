//! Counter-based random stream derivation.
//!
//! Every random draw in the crate comes from a stream addressed by
//! `(master_seed, block, replicate)`. The master seed keys a ChaCha8
//! generator and the `(block, replicate)` pair is packed injectively into the
//! 64-bit ChaCha stream id, so streams are reproducible independently of the
//! order (or thread) in which they are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Random stream handed out by [`SeedSpec::stream`].
pub type Stream = ChaCha8Rng;

/// Largest block or replicate index addressable by a stream.
pub const MAX_STREAM_INDEX: usize = u32::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Stream for `(block, replicate)`.
    ///
    /// Panics if either index exceeds [`MAX_STREAM_INDEX`].
    pub fn stream(&self, block: usize, replicate: usize) -> Stream {
        derive_stream(self, block, replicate)
    }

    /// Independent child seed for a named purpose (replication number,
    /// engine role, ...). Children of distinct tags never share streams with
    /// each other or with the parent in practice.
    pub fn child(&self, tag: u64) -> SeedSpec {
        let mixed = splitmix64(self.master_seed ^ splitmix64(tag.wrapping_add(0x5851_F42D_4C95_7F2D)));
        SeedSpec::new(mixed)
    }
}

impl From<u64> for SeedSpec {
    fn from(master_seed: u64) -> Self {
        Self::new(master_seed)
    }
}

/// Stream for `(seed, block, replicate)`.
pub fn derive_stream(seed: &SeedSpec, block: usize, replicate: usize) -> Stream {
    assert!(
        block <= MAX_STREAM_INDEX && replicate <= MAX_STREAM_INDEX,
        "stream index ({block}, {replicate}) outside the addressable grid"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed.master_seed);
    rng.set_stream(((block as u64) << 32) | replicate as u64);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
