//! Counter-based random streams.
//!
//! A run has one master seed. Every independent unit of work (a grid point,
//! then a trial within it) gets its own stream addressed by integers, so the
//! random numbers a trial sees depend only on `(seed, grid index, trial index)`
//! and never on scheduling or thread count.
//!
//! * `derive_seed(seed, index)` mixes a grid index into the master seed with
//!   two rounds of SplitMix64.
//! * `trial_rng(base, trial)` seeds ChaCha8 from `base` and selects stream
//!   number `trial`; ChaCha exposes 2^64 independent streams per key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// One SplitMix64 output step.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-experiment `index` of a run with master `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Generator for trial `trial` under base seed `base`.
pub fn trial_rng(base: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(trial);
    rng
}
