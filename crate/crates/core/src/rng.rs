//! Seed derivation for replicated Monte Carlo studies.
//!
//! Replication `k` of a study with base seed `b` has seed `b ^ k`. The
//! ChaCha8 key holds both `b ^ k` and a hash of `b`: with the xor alone, two
//! small base seeds would share the same set of replication seeds, only
//! permuted, and their averages would coincide. Separate purposes inside one replication (full path,
//! fresh blocks, PRM draws, ...) use distinct ChaCha stream ids, so adding a
//! new consumer never shifts the numbers seen by an existing one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used across the crate.
pub mod stream {
    pub const PATH: u64 = 0;
    pub const BLOCK: u64 = 1;
    pub const PRM: u64 = 2;
    pub const PILOT: u64 = 3;
    pub const TRIM: u64 = 4;
    pub const COUPLING: u64 = 5;
}

/// Seed of replication `rep` under base seed `base`.
#[inline]
pub fn rep_seed(base: u64, rep: u64) -> u64 {
    base ^ rep
}

/// Generator for replication `rep` on stream `stream`.
pub fn rng_for(base: u64, rep: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&rep_seed(base, rep).to_le_bytes());
    key[8..16].copy_from_slice(&splitmix64(base).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for a single seeded draw (no replication index).
pub fn rng_from_seed(seed: u64, stream: u64) -> ChaCha8Rng {
    rng_for(seed, 0, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: f64 = rng_for(7, 3, stream::PATH).random();
        let b: f64 = rng_for(7, 3, stream::PATH).random();
        let c: f64 = rng_for(7, 3, stream::BLOCK).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn small_bases_do_not_share_replications() {
        // 1 ^ 3 == 2 ^ 0, yet the two replications must differ
        let a: f64 = rng_for(1, 3, stream::PATH).random();
        let b: f64 = rng_for(2, 0, stream::PATH).random();
        assert_ne!(a, b);
    }
}
