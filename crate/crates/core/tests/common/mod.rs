#![allow(dead_code)]

use hsx_core::InitialProfile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0x5eed_2024;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random profile with `1..=max_cells` cells, widths in `[0.05, 1]` and
/// slopes in `[-5, 5]`.
pub fn random_profile(rng: &mut impl Rng, max_cells: usize) -> InitialProfile {
    let n = rng.gen_range(1..=max_cells);
    let mut bp = vec![rng.gen_range(-2.0..0.0)];
    for _ in 0..n {
        let last = *bp.last().unwrap();
        bp.push(last + rng.gen_range(0.05..=1.0));
    }
    let slopes = (0..n).map(|_| rng.gen_range(-5.0..=5.0)).collect();
    InitialProfile::new(bp, slopes, rng.gen_range(-1.0..=1.0)).unwrap()
}

/// The fixed corpus used across the acceptance criteria.
pub fn corpus(count: usize) -> Vec<InitialProfile> {
    let mut r = rng(CORPUS_SEED);
    (0..count).map(|_| random_profile(&mut r, 50)).collect()
}

pub fn cusp() -> InitialProfile {
    InitialProfile::new(vec![0.0, 1.0], vec![-2.0], 0.0).unwrap()
}

pub fn two_cell() -> InitialProfile {
    InitialProfile::new(vec![-1.0, 0.0, 1.0], vec![1.0, -1.0], 0.0).unwrap()
}

/// Uniform label inside the support.
pub fn label(rng: &mut impl Rng, p: &InitialProfile) -> f64 {
    let (lo, hi) = p.support();
    rng.gen_range(lo..hi)
}
