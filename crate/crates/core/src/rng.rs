//! Deterministic random streams.
//!
//! All randomness comes from ChaCha8, a counter-based generator: the output is a
//! pure function of `(key, stream, counter)`, so replicas and environment sites
//! get independent streams without shared state.
//!
//! * replica `r` of a run with base seed `s` uses seed `s ⊕ r`;
//! * walk transitions are drawn from [`walk_rng`] keyed by that seed;
//! * the environment at site `x` is drawn from [`site_rng`] keyed by
//!   `(environment seed, x)`, independent of visit order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn replica_seed(base: u64, replica: u64) -> u64 {
    base ^ replica
}

pub fn walk_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Environment seed paired with a walk seed for annealed sampling.
pub fn environment_seed(walk_seed: u64) -> u64 {
    mix64(walk_seed ^ 0x656e_7669_726f_6e6d)
}

/// Stream for the environment at `site`.
///
/// The key holds the environment seed and up to three coordinates verbatim, so
/// distinct sites in `d ≤ 3` always get distinct keys; further coordinates are
/// hashed into the stream id.
pub fn site_rng(env_seed: u64, site: &[i64]) -> SimRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&env_seed.to_le_bytes());
    for (i, &c) in site.iter().take(3).enumerate() {
        key[8 + 8 * i..16 + 8 * i].copy_from_slice(&c.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    let stream = site.iter().skip(3).fold(site.len() as u64, |h, &c| mix64(h ^ c as u64));
    rng.set_stream(stream);
    rng
}
