//! Seeded random streams.
//!
//! Every random draw in the crate goes through a ChaCha20 generator. A run
//! seeded with `seed` that needs independent sub-streams (shards, repetitions,
//! machines) uses [`child_rng`], which keeps the key and selects ChaCha stream
//! number `index`. Two children of the same seed never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn child_rng(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a 64-bit seed for sub-experiment `index` with one SplitMix64 round.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn children_differ() {
        let a: u64 = child_rng(7, 0).random();
        let b: u64 = child_rng(7, 1).random();
        assert_ne!(a, b);
        assert_ne!(child_seed(7, 0), child_seed(7, 1));
        assert_eq!(child_seed(7, 3), child_seed(7, 3));
    }
}

/// `dim` independent standard normals drawn from [`rng_from_seed`]`(seed)`.
pub fn gaussian_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Overwrites `out` with independent standard normals from `rng`.
pub fn fill_gaussian(rng: &mut Rng, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = StandardNormal.sample(rng));
}
