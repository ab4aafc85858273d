//! Uniform multinomial resampling weights.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Counts of `total` draws spread uniformly over `categories` cells.
///
/// Small totals tally individual uniform draws; large totals use the exact
/// sequential conditional-binomial decomposition, which costs
/// O(`categories`) regardless of `total`.
pub fn multinomial_uniform<R: Rng + ?Sized>(rng: &mut R, total: u64, categories: usize) -> Vec<u64> {
    assert!(categories > 0, "multinomial needs at least one category");
    let mut counts = vec![0u64; categories];
    if total <= 4 * categories as u64 {
        for _ in 0..total {
            counts[rng.random_range(0..categories)] += 1;
        }
        return counts;
    }
    let mut remaining = total;
    for (i, c) in counts.iter_mut().enumerate().take(categories - 1) {
        if remaining == 0 {
            break;
        }
        let p = 1.0 / (categories - i) as f64;
        let draw = Binomial::new(remaining, p).expect("valid binomial").sample(rng);
        *c = draw;
        remaining -= draw;
    }
    counts[categories - 1] += remaining;
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_sum_to_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (total, cats) in [(0u64, 3usize), (10, 10), (100_000, 1000), (7, 1), (5000, 3)] {
            let c = multinomial_uniform(&mut rng, total, cats);
            assert_eq!(c.len(), cats);
            assert_eq!(c.iter().sum::<u64>(), total);
        }
    }

    #[test]
    fn both_paths_have_uniform_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for total in [20u64, 400] {
            let cats = 10;
            let reps = 20_000;
            let mut sum = vec![0.0; cats];
            let mut sumsq = vec![0.0; cats];
            for _ in 0..reps {
                for (j, &c) in multinomial_uniform(&mut rng, total, cats).iter().enumerate() {
                    sum[j] += c as f64;
                    sumsq[j] += (c * c) as f64;
                }
            }
            let p = 1.0 / cats as f64;
            let mean = total as f64 * p;
            let var = total as f64 * p * (1.0 - p);
            for j in 0..cats {
                let m = sum[j] / reps as f64;
                let v = sumsq[j] / reps as f64 - m * m;
                assert!((m - mean).abs() < 4.0 * (var / reps as f64).sqrt(), "mean {m} vs {mean}");
                assert!((v / var - 1.0).abs() < 0.05, "var {v} vs {var}");
            }
        }
    }
}
