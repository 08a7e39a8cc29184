//! Seeded random streams.
//!
//! Every random draw in the crate comes from a `ChaCha8Rng`. A stream is
//! keyed by `(seed, purpose)` and selected by a 64-bit index through
//! ChaCha's native stream counter:
//!
//! ```text
//! key    = splitmix64(seed ^ purpose_tag)   -> ChaCha8Rng::seed_from_u64(key)
//! stream = index                            -> rng.set_stream(index)
//! ```
//!
//! Because each frame, epoch, or sample gets its own stream, the bytes
//! produced never depend on the order in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Weight initialisation.
    Init,
    /// Per-epoch shuffling of the training order.
    Shuffle,
    /// Per-(epoch, sample) flip augmentation.
    Augment,
    /// Per-(epoch, sample) dropout masks.
    Dropout,
    /// Per-frame interference draws.
    Frame,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Init => 0x696e_6974_0000_0001,
            Purpose::Shuffle => 0x7368_7566_0000_0002,
            Purpose::Augment => 0x6175_676d_0000_0003,
            Purpose::Dropout => 0x6472_6f70_0000_0004,
            Purpose::Frame => 0x6672_616d_0000_0005,
        }
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ purpose.tag()));
    rng.set_stream(index);
    rng
}

/// Packs two 32-bit indices into one stream index.
pub fn pair_index(hi: u32, lo: u32) -> u64 {
    (u64::from(hi) << 32) | u64::from(lo)
}
