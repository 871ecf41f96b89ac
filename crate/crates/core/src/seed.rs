//! Counter-based seeding.
//!
//! Every random frame gets its own generator whose seed is a pure function of
//! the experiment seed and the frame's coordinates in the acquisition, so frames
//! can be drawn in any order or on any number of threads with identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every sampled frame.
pub type FrameRng = ChaCha8Rng;

/// Independent seed streams within one acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Quantum = 1,
    Noise = 2,
    Sweep = 3,
    Characterize = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of counters into `base`.
pub fn derive(base: u64, counters: &[u64]) -> u64 {
    counters
        .iter()
        .fold(splitmix64(base), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

/// Seed for frame `(repeat, step)` of the given stream.
pub fn frame_seed(base: u64, stream: Stream, repeat: usize, step: usize) -> u64 {
    derive(base, &[stream as u64, repeat as u64, step as u64])
}

pub fn rng(seed: u64) -> FrameRng {
    FrameRng::seed_from_u64(seed)
}
