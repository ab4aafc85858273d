//! Bag of little bootstraps over inflated multinomial resamples.

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::data::{partition_random_n, DataTable, RowsView};
use crate::error::{Error, Result};
use crate::resample::budget::{run_with_budget, TimeBudget};
use crate::resample::{
    balanced_sizes, canonical_rows, inflated_statistic, interval_from_quantiles, quantile_sorted,
    require_degree_two, sorted_copy, ConfidenceInterval,
};
use crate::scalar::{kahan_sum, Scalar};
use crate::seed::SeedSpec;
use crate::symstat::kernel::Kernel;
use crate::symstat::ustat::{v_stat_rows, Evaluation};
use crate::variance::population_variance;

const SUBSET_TAG: u64 = 0x626c_6273;
const RESAMPLE_TAG: u64 = 0x626c_6272;

/// How the little subsets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SubsetSelection {
    /// Each subset is drawn without replacement, independently.
    Random,
    /// Subsets are distinct blocks of one random balanced partition.
    #[default]
    Disjoint,
}

/// Quality measure extracted from each subset's replicate law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Xi {
    /// Width of the equal-tail interval for the statistic at `level`.
    CiWidth { level: f64 },
    /// Variance of the statistic, `Var(u) / N`.
    Variance,
    /// Quantile of the replicates `u`.
    Quantile(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct BlbConfig {
    /// Subset size `n`.
    pub subset_size: usize,
    /// Number of subsets `S`.
    pub subsets: usize,
    /// Inflated resamples per subset `B`.
    pub b: usize,
    /// Blocks the inflated resample is split into when recomputing the
    /// statistic; 1 gives the undivided statistic of size `N`.
    pub inflated_blocks: usize,
    pub selection: SubsetSelection,
    pub seed: SeedSpec,
    /// Checked between subsets.
    pub budget: Option<TimeBudget>,
    pub eval: Evaluation,
}

/// Per-subset replicates `u = sqrt(N) (theta*_{s,N} - theta_{s,n})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlbResult<T> {
    pub subset_replicates: Vec<Vec<T>>,
    /// Plug-in V-statistic of each subset.
    pub subset_centers: Vec<T>,
    pub n: usize,
    pub requested: usize,
    pub completed: usize,
    pub budgeted: bool,
    pub timestamps: Option<Vec<f64>>,
}

impl<T: Scalar> BlbResult<T> {
    fn xi_one(&self, u: &[T], xi: Xi) -> Result<T> {
        let root_n = T::of((self.n as f64).sqrt());
        match xi {
            Xi::CiWidth { level } => {
                if !(level > 0.0 && level < 1.0) {
                    return Err(Error::invalid(format!("confidence level must lie in (0, 1), got {level}")));
                }
                let s = sorted_copy(u);
                let tau = 1.0 - level;
                Ok((quantile_sorted(&s, 1.0 - tau / 2.0)? - quantile_sorted(&s, tau / 2.0)?) / root_n)
            }
            Xi::Variance => Ok(population_variance(u)? / T::of_usize(self.n)),
            Xi::Quantile(q) => quantile_sorted(&sorted_copy(u), q),
        }
    }

    /// `S^{-1} sum_s xi(subset s)`.
    pub fn xi(&self, xi: Xi) -> Result<T> {
        let per = self
            .subset_replicates
            .iter()
            .map(|u| self.xi_one(u, xi))
            .collect::<Result<Vec<T>>>()?;
        Ok(kahan_sum(per.iter().copied()) / T::of_usize(per.len()))
    }

    /// Equal-tail interval built from subset-averaged replicate quantiles.
    pub fn interval(&self, point: T, level: f64) -> Result<ConfidenceInterval<T>> {
        let tau = 1.0 - level;
        let lo = self.xi(Xi::Quantile(tau / 2.0))?;
        let hi = self.xi(Xi::Quantile(1.0 - tau / 2.0))?;
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::invalid(format!("confidence level must lie in (0, 1), got {level}")));
        }
        Ok(interval_from_quantiles(point, lo, hi, (self.n as f64).sqrt(), level))
    }
}

/// Runs the bag of little bootstraps.
pub fn blb_run<T, K>(table: &DataTable<T>, kernel: &K, cfg: &BlbConfig) -> Result<BlbResult<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    require_degree_two(kernel)?;
    kernel.validate_dim(table.ncols())?;
    let big_n = table.nrows();
    let n = cfg.subset_size;
    if n < 2 || n > big_n {
        return Err(Error::invalid(format!("subset size must lie in 2..={big_n}, got {n}")));
    }
    if cfg.subsets == 0 || cfg.b == 0 {
        return Err(Error::invalid("subsets and resamples per subset must be positive"));
    }
    if cfg.inflated_blocks == 0 || cfg.inflated_blocks > big_n {
        return Err(Error::invalid(format!("inflated blocks must lie in 1..={big_n}")));
    }
    let disjoint = match cfg.selection {
        SubsetSelection::Disjoint => {
            let groups = big_n / n;
            if cfg.subsets > groups {
                return Err(Error::invalid(format!(
                    "{} disjoint subsets of size {n} do not fit in {big_n} rows",
                    cfg.subsets
                )));
            }
            Some(partition_random_n(big_n, groups, &cfg.seed.child(SUBSET_TAG))?)
        }
        SubsetSelection::Random => None,
    };
    let sizes = balanced_sizes(big_n, cfg.inflated_blocks);
    let ncols = table.ncols();
    let root_n = T::of((big_n as f64).sqrt());
    let resample_seed = cfg.seed.child(RESAMPLE_TAG);

    let run = run_with_budget(cfg.subsets, cfg.budget, |s| {
        let idx: Vec<usize> = match &disjoint {
            Some(p) => p.block(s).to_vec(),
            None => {
                let mut rng = cfg.seed.child(SUBSET_TAG).stream(0, s);
                sample_indices(&mut rng, big_n, n).into_vec()
            }
        };
        let buf = canonical_rows(table.view(), &idx);
        let rows = RowsView::new(&buf, ncols);
        let theta = v_stat_rows(rows, kernel, cfg.eval)?;
        let mut u = Vec::with_capacity(cfg.b);
        for b in 0..cfg.b {
            let mut rng = resample_seed.stream(s, b);
            let t = inflated_statistic(rows, &sizes, &mut rng, kernel, cfg.eval)?;
            u.push(root_n * (t - theta));
        }
        Ok((theta, u))
    })?;

    let (subset_centers, subset_replicates) = run.outputs.into_iter().unzip();
    Ok(BlbResult {
        subset_replicates,
        subset_centers,
        n: big_n,
        requested: cfg.subsets,
        completed: run.completed,
        budgeted: run.budgeted,
        timestamps: run.timestamps,
    })
}

/// Subset-averaged quality measure `xi`.
pub fn blb_estimate<T, K>(table: &DataTable<T>, kernel: &K, cfg: &BlbConfig, xi: Xi) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    blb_run(table, kernel, cfg)?.xi(xi)
}
