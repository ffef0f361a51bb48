//! Seed derivation for reproducible sub-tasks.
//!
//! Every randomized operation in this crate takes an explicit 64-bit seed.
//! Sub-tasks (per-target subsamples, per-pair learner inits, Monte-Carlo
//! trials) derive their own seeds by mixing the parent seed with the task
//! coordinates, so results are independent of execution order and worker
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// splitmix64 finalizer; full-period bijection on u64.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mix an ordered list of 64-bit parts into a single derived seed.
///
/// Absorbs each part through a splitmix64 round so that permuting or
/// truncating the parts yields unrelated seeds.
pub fn mix(parts: &[u64]) -> u64 {
    let mut acc = 0x243f_6a88_85a3_08d3u64; // arbitrary non-zero start
    for &p in parts {
        acc = splitmix64(acc ^ p);
    }
    acc
}

/// Deterministic RNG used throughout: ChaCha12, seeded from a u64.
///
/// ChaCha output is specified bit-for-bit, so identical seeds give
/// identical streams on every platform.
pub fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Role tags for deriving sub-seeds; keeps distinct uses of the same
/// (seed, coordinates) tuple from colliding.
pub mod role {
    pub const SUBSAMPLE: u64 = 0x01;
    pub const LEARNER_OUT: u64 = 0x02;
    pub const LEARNER_IN: u64 = 0x03;
    pub const GAME_TRIAL: u64 = 0x04;
    pub const MC: u64 = 0x05;
    pub const SELECT: u64 = 0x06;
    pub const GENERATE: u64 = 0x07;
    pub const VICTIM: u64 = 0x08;
    pub const RESAMPLE: u64 = 0x09;
}
