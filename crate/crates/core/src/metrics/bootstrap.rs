use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stats::quantile;

/// Percentile bootstrap interval of the mean: the `(1-level)/2` and
/// `1-(1-level)/2` quantiles of `n_resamples` resampled means.
pub fn bootstrap_ci(samples: &[f64], level: f64, n_resamples: usize, seed: u64) -> (f64, f64) {
    assert!(!samples.is_empty(), "bootstrap of an empty sample");
    assert!(
        level > 0.0 && level < 1.0,
        "confidence level must lie in (0, 1)"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = samples.len();
    let mut means: Vec<f64> = (0..n_resamples.max(1))
        .map(|_| (0..n).map(|_| samples[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile(&means, tail), quantile(&means, 1.0 - tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_samples_give_degenerate_interval() {
        assert_eq!(bootstrap_ci(&[2.5; 7], 0.95, 1000, 0), (2.5, 2.5));
    }

    #[test]
    fn seeded() {
        let s = [0.1, 0.5, 0.9, 1.3];
        assert_eq!(bootstrap_ci(&s, 0.9, 500, 3), bootstrap_ci(&s, 0.9, 500, 3));
    }

    #[test]
    fn balanced_binary_sample_brackets_half_and_shrinks() {
        let mut small = vec![0.0; 50];
        small.extend(vec![1.0; 50]);
        let (lo, hi) = bootstrap_ci(&small, 0.95, 10_000, 1);
        assert!(lo < 0.5 && hi > 0.5);
        let mut big = vec![0.0; 800];
        big.extend(vec![1.0; 800]);
        let (lo2, hi2) = bootstrap_ci(&big, 0.95, 10_000, 1);
        let ratio = (hi - lo) / (hi2 - lo2);
        // width ~ 1/sqrt(n): 16x the data, ~4x narrower
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
        // normal approximation: 2 * 1.96 * 0.5 / sqrt(100)
        assert!(((hi - lo) - 0.196).abs() < 0.02);
    }

    /// Exact bootstrap distribution of the mean of three values: all 27
    /// equally likely resamples.
    fn exact_quantile(samples: [f64; 3], q: f64) -> f64 {
        let mut means = Vec::new();
        for a in samples {
            for b in samples {
                for c in samples {
                    means.push((a + b + c) / 3.0);
                }
            }
        }
        means.sort_by(f64::total_cmp);
        // smallest value whose CDF reaches q
        let k = ((q * 27.0).ceil() as usize).clamp(1, 27);
        means[k - 1]
    }

    #[test]
    fn matches_exhaustive_enumeration_for_three_samples() {
        let samples = [0.0, 1.0, 5.0];
        // level 0.6 puts the tails at 0.2 and 0.8; CDF jumps sit at multiples
        // of 1/27, and 0.2*27 = 5.4, 0.8*27 = 21.6 are well inside a step.
        let (lo, hi) = bootstrap_ci(&samples, 0.6, 200_000, 9);
        assert_eq!(lo, exact_quantile(samples, 0.2));
        assert_eq!(hi, exact_quantile(samples, 0.8));
    }

    proptest! {
        #[test]
        fn interval_contains_sample_mean(samples in prop::collection::vec(-10.0f64..10.0, 1..30), seed in 0u64..1000) {
            let (lo, hi) = bootstrap_ci(&samples, 0.95, 2000, seed);
            let m = samples.iter().sum::<f64>() / samples.len() as f64;
            prop_assert!(lo <= m + 1e-12 && m <= hi + 1e-12, "({lo}, {hi}) vs {m}");
        }
    }
}
