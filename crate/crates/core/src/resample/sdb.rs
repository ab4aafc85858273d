//! Subsampled double bootstrap: one inflated resample per random subset.

use rand::Rng;

use crate::data::{DataTable, RowsView};
use crate::error::{Error, Result};
use crate::resample::budget::{run_with_budget, TimeBudget};
use crate::resample::{
    balanced_sizes, canonical_rows, inflated_statistic, require_degree_two, BootstrapResult, Center,
    ScaleConvention,
};
use crate::scalar::Scalar;
use crate::seed::SeedSpec;
use crate::symstat::kernel::Kernel;
use crate::symstat::ustat::{v_stat_rows, Evaluation};

#[derive(Debug, Clone, Copy)]
pub struct SdbConfig {
    /// Subset size `n`.
    pub subset_size: usize,
    /// Requested subsets `S`, one replicate each.
    pub subsets: usize,
    /// Blocks the inflated resample is split into; 1 gives the undivided
    /// statistic of size `N`.
    pub inflated_blocks: usize,
    pub seed: SeedSpec,
    pub budget: Option<TimeBudget>,
    pub eval: Evaluation,
}

/// Subsampled double bootstrap.
///
/// Iteration `s` draws `n` rows with replacement from the table, takes
/// their plug-in V-statistic `theta_s`, draws one inflated resample of size
/// `N` from the subset and records `u_s = sqrt(N) (theta*_s - theta_s)`.
pub fn sdb_run<T, K>(table: &DataTable<T>, kernel: &K, cfg: &SdbConfig) -> Result<BootstrapResult<T>>
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
    if cfg.inflated_blocks == 0 || cfg.inflated_blocks > big_n {
        return Err(Error::invalid(format!("inflated blocks must lie in 1..={big_n}")));
    }
    let sizes = balanced_sizes(big_n, cfg.inflated_blocks);
    let ncols = table.ncols();
    let root_n = T::of((big_n as f64).sqrt());

    let run = run_with_budget(cfg.subsets, cfg.budget, |s| {
        let mut rng = cfg.seed.stream(0, s);
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..big_n)).collect();
        let buf = canonical_rows(table.view(), &idx);
        let rows = RowsView::new(&buf, ncols);
        let theta = v_stat_rows(rows, kernel, cfg.eval)?;
        let star = inflated_statistic(rows, &sizes, &mut rng, kernel, cfg.eval)?;
        Ok((theta, star))
    })?;

    let (centers, raw): (Vec<T>, Vec<T>) = run.outputs.into_iter().unzip();
    Ok(BootstrapResult {
        replicates: raw.iter().zip(&centers).map(|(&t, &c)| root_n * (t - c)).collect(),
        raw_statistics: raw,
        center: Center::PerReplicate(centers),
        scale_convention: ScaleConvention::SqrtN,
        n: big_n,
        k: cfg.inflated_blocks,
        requested: cfg.subsets,
        completed: run.completed,
        budgeted: run.budgeted,
        timestamps: run.timestamps,
    })
}
