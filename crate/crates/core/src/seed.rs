//! Seed derivation for independent random streams.
//!
//! Every source of randomness in a run (each arm's reward stream, each
//! player's policy stream, the churn event stream) gets its own generator
//! seeded from `(base_seed, repetition, stream tag, index)`. Keeping the
//! streams separate is what makes common-random-number comparisons work:
//! the k-th reward draw of arm `a` is identical across algorithms run on
//! the same repetition seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags keep different consumers of randomness from colliding.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    /// Reward draws for one arm.
    ArmRewards(u32),
    /// One player's policy randomness (random hopping, chair draws).
    Policy(u32),
    /// Random selection of leaving players.
    Events,
}

impl Stream {
    fn tag(self) -> (u64, u64) {
        match self {
            Stream::ArmRewards(arm) => (0x01, u64::from(arm)),
            Stream::Policy(player) => (0x02, u64::from(player)),
            Stream::Events => (0x03, 0),
        }
    }
}

/// SplitMix64 step; a solid 64-bit mixer with full avalanche.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive the seed for one stream of one repetition.
pub fn stream_seed(base_seed: u64, repetition: u32, stream: Stream) -> u64 {
    let (kind, idx) = stream.tag();
    let mut state = base_seed;
    let mut out = splitmix64(&mut state);
    state ^= u64::from(repetition).wrapping_mul(0xd6e8feb86659fd93);
    out ^= splitmix64(&mut state);
    state ^= kind.wrapping_mul(0xa5a5a5a5a5a5a5a5) ^ idx.rotate_left(17);
    out ^= splitmix64(&mut state);
    out
}

/// Build the deterministic generator for one stream.
pub fn stream_rng(base_seed: u64, repetition: u32, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(base_seed, repetition, stream))
}
