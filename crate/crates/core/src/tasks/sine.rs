use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mixture of sines of increasing frequency on `[-1, 1]`.
pub fn sine_target(x: f64) -> f64 {
    0.5 * (2.14 * (x + 2.0)).sin()
        + 0.82 * (9.0 * x + 0.4).sin()
        + 0.38 * (12.0 * x).sin()
        + 0.32 * (38.0 * x - 0.1).sin()
}

pub const SINE_DATASET_SIZE: usize = 10_000;

/// `n` inputs drawn uniformly from `[-1, 1]` with their targets.
pub fn sine_dataset(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = rng.gen_range(-1.0..=1.0);
            (x, sine_target(x))
        })
        .collect()
}
