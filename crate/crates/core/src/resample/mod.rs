//! Bootstrap engines for split-and-conquer statistics: distributed (DB),
//! pseudo-distributed (PDB), bag of little bootstraps (BLB) and subsampled
//! double bootstrap (SDB).

pub mod blb;
pub mod budget;
pub mod db;
pub mod multinomial;
pub mod pdb;
pub mod sdb;

use rand::Rng;
use serde::Serialize;

use crate::data::RowsView;
use crate::error::{Error, Result};
use crate::scalar::{cmp_rows, cmp_scalar, Scalar};
use crate::symstat::kernel::Kernel;
use crate::symstat::ustat::{size_weighted_mean, u_stat_weighted_rows, Evaluation};
use crate::variance::population_variance;

pub use blb::{blb_estimate, blb_run, BlbConfig, BlbResult, SubsetSelection, Xi};
pub use budget::{run_with_budget, BudgetRun, TimeBudget};
pub use db::{db_run, DbConfig};
pub use multinomial::multinomial_uniform;
pub use pdb::{pdb_run, PdbConfig, PdbMode};
pub use sdb::{sdb_run, SdbConfig};

/// How replicates relate to the statistic's estimation error, which fixes
/// the divisor used when turning replicate quantiles into an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScaleConvention {
    /// Replicates approximate `sqrt(N) (T - theta)`.
    SqrtN,
    /// Pseudo-distributed replicates `sqrt(K) (mean of rescaled block values - c)`,
    /// which also approximate `sqrt(N) (T - theta)`.
    KSqrt,
    /// Degenerate pseudo-distributed replicates, approximating
    /// `N K^{-1/2} (T - theta)`.
    NOverSqrtK,
}

impl ScaleConvention {
    pub fn label(&self) -> &'static str {
        match self {
            ScaleConvention::SqrtN => "sqrt-N",
            ScaleConvention::KSqrt => "K-sqrt",
            ScaleConvention::NOverSqrtK => "N-over-sqrtK",
        }
    }

    /// Factor `s` such that replicates approximate `s (T - theta)`.
    pub fn divisor(&self, n: usize, k: usize) -> f64 {
        match self {
            ScaleConvention::SqrtN | ScaleConvention::KSqrt => (n as f64).sqrt(),
            ScaleConvention::NOverSqrtK => n as f64 / (k as f64).sqrt(),
        }
    }
}

/// Centering value of the replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Center<T> {
    Fixed(T),
    /// One center per replicate (subsampled double bootstrap).
    PerReplicate(Vec<T>),
}

/// Centered, scaled bootstrap replicates of a statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResult<T> {
    pub replicates: Vec<T>,
    /// Uncentered replicate statistics.
    pub raw_statistics: Vec<T>,
    pub center: Center<T>,
    pub scale_convention: ScaleConvention,
    /// Total sample size `N`.
    pub n: usize,
    /// Number of blocks `K`.
    pub k: usize,
    pub requested: usize,
    pub completed: usize,
    /// Budgeted runs depend on the wall clock and are not reproducible.
    pub budgeted: bool,
    pub timestamps: Option<Vec<f64>>,
}

/// Two-sided interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval<T> {
    pub lower: T,
    pub upper: T,
    pub level: f64,
}

impl<T: Scalar> ConfidenceInterval<T> {
    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    pub fn contains(&self, x: T) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Type-7 quantile (linear interpolation between order statistics) of
/// ascending `sorted`.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], q: f64) -> Result<T> {
    if sorted.len() < 2 {
        return Err(Error::InsufficientReplicates { needed: 2, got: sorted.len() });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("quantile level {q} outside [0, 1]")));
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = T::of(h - lo as f64);
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

pub(crate) fn sorted_copy<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(cmp_scalar);
    v
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("confidence level must lie in (0, 1), got {level}")))
    }
}

/// `(point - u_hi / s, point - u_lo / s)` from replicate quantiles.
pub(crate) fn interval_from_quantiles<T: Scalar>(point: T, u_lo: T, u_hi: T, s: f64, level: f64) -> ConfidenceInterval<T> {
    let s = T::of(s);
    ConfidenceInterval { lower: point - u_hi / s, upper: point - u_lo / s, level }
}

impl<T: Scalar> BootstrapResult<T> {
    pub fn b(&self) -> usize {
        self.replicates.len()
    }

    pub fn quantile(&self, q: f64) -> Result<T> {
        quantile_sorted(&sorted_copy(&self.replicates), q)
    }

    /// Equal-tail interval `(T - s^{-1} u_{1-tau/2}, T - s^{-1} u_{tau/2})`,
    /// `tau = 1 - level`, with `s` from the scale convention.
    pub fn ci_equal_tail(&self, point: T, level: f64) -> Result<ConfidenceInterval<T>> {
        check_level(level)?;
        let sorted = sorted_copy(&self.replicates);
        let tau = 1.0 - level;
        let lo = quantile_sorted(&sorted, tau / 2.0)?;
        let hi = quantile_sorted(&sorted, 1.0 - tau / 2.0)?;
        Ok(interval_from_quantiles(point, lo, hi, self.scale_convention.divisor(self.n, self.k), level))
    }

    /// Divisor-`B` sample variance of the uncentered replicate statistics.
    pub fn sample_variance(&self) -> Result<T> {
        population_variance(&self.raw_statistics)
    }

    /// Divisor-`B` variance of the centered, scaled replicates.
    pub fn replicate_variance(&self) -> Result<T> {
        population_variance(&self.replicates)
    }
}

/// Equal-tail confidence interval; see [`BootstrapResult::ci_equal_tail`].
pub fn ci_equal_tail<T: Scalar>(result: &BootstrapResult<T>, point: T, level: f64) -> Result<ConfidenceInterval<T>> {
    result.ci_equal_tail(point, level)
}

/// Sample variance `sigma^2_DB` of the uncentered replicate statistics.
pub fn bootstrap_sample_variance<T: Scalar>(result: &BootstrapResult<T>) -> Result<T> {
    result.sample_variance()
}

/// Rows at `indices`, copied in lexicographic row order.
pub(crate) fn canonical_rows<T: Scalar>(rows: RowsView<'_, T>, indices: &[usize]) -> Vec<T> {
    let mut idx = indices.to_vec();
    idx.sort_by(|&a, &b| cmp_rows(rows.row(a), rows.row(b)));
    rows.gather(&idx)
}

/// Balanced split of `n` into `k` sizes, larger sizes first.
pub(crate) fn balanced_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|j| n / k + usize::from(j < n % k)).collect()
}

pub(crate) fn require_degree_two<T: Scalar, K: Kernel<T> + ?Sized>(kernel: &K) -> Result<()> {
    if kernel.degree() == 2 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "bootstrap engines need a degree-2 kernel, got degree {}",
            kernel.degree()
        )))
    }
}

/// Distributed statistic of an inflated resample of `rows`: the `N`
/// inflated points are split into blocks of the given sizes, each block
/// drawing `Multinomial(n_j, uniform)` weights over the rows.
pub(crate) fn inflated_statistic<T, K, R>(
    rows: RowsView<'_, T>,
    block_sizes: &[usize],
    rng: &mut R,
    kernel: &K,
    eval: Evaluation,
) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
    R: Rng + ?Sized,
{
    let mut per_block = Vec::with_capacity(block_sizes.len());
    for &nj in block_sizes {
        let w = multinomial_uniform(rng, nj as u64, rows.len());
        per_block.push(u_stat_weighted_rows(rows, &w, kernel, eval)?);
    }
    size_weighted_mean(&per_block, block_sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(reps: Vec<f64>) -> BootstrapResult<f64> {
        BootstrapResult {
            raw_statistics: reps.clone(),
            completed: reps.len(),
            requested: reps.len(),
            replicates: reps,
            center: Center::Fixed(0.0),
            scale_convention: ScaleConvention::SqrtN,
            n: 100,
            k: 1,
            budgeted: false,
            timestamps: None,
        }
    }

    #[test]
    fn type7_quantiles() {
        let s = [1.0f64, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0).unwrap(), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0).unwrap(), 4.0);
        assert_eq!(quantile_sorted(&s, 0.5).unwrap(), 2.5);
        assert!((quantile_sorted(&s, 0.1).unwrap() - 1.3).abs() < 1e-15);
        assert!(quantile_sorted(&[1.0], 0.5).is_err());
    }

    #[test]
    fn symmetric_replicates_center_interval() {
        let ci = result(vec![-1.0, 1.0]).ci_equal_tail(3.0, 0.5).unwrap();
        assert!(((ci.lower + ci.upper) / 2.0 - 3.0).abs() < 1e-15);
        assert!(ci.lower <= ci.upper);
    }

    #[test]
    fn zero_replicates_give_point_interval() {
        let ci = result(vec![0.0; 10]).ci_equal_tail(2.5, 0.95).unwrap();
        assert_eq!((ci.lower, ci.upper), (2.5, 2.5));
    }

    #[test]
    fn interval_orientation() {
        // u quantiles (lo, hi) = (-2, 4) at N = 100: (T - 0.4, T + 0.2)
        let ci = result(vec![-2.0, 4.0]).ci_equal_tail(1.0, 0.999_999).unwrap();
        assert!((ci.lower - 0.6).abs() < 1e-5 && (ci.upper - 1.2).abs() < 1e-5);
    }

    #[test]
    fn ci_rejects_bad_level() {
        assert!(result(vec![0.0, 1.0]).ci_equal_tail(0.0, 1.0).is_err());
        assert!(result(vec![1.0]).ci_equal_tail(0.0, 0.9).is_err());
    }

    #[test]
    fn divisors() {
        assert_eq!(ScaleConvention::SqrtN.divisor(100, 4), 10.0);
        assert_eq!(ScaleConvention::KSqrt.divisor(100, 4), 10.0);
        assert_eq!(ScaleConvention::NOverSqrtK.divisor(100, 4), 50.0);
    }
}
