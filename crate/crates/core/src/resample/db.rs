//! Distributed bootstrap: resampling within each block.

use crate::data::{BlockPartition, DataTable, RowsView};
use crate::error::Result;
use crate::resample::budget::{run_with_budget, TimeBudget};
use crate::resample::multinomial::multinomial_uniform;
use crate::resample::{canonical_rows, require_degree_two, BootstrapResult, Center, ScaleConvention};
use crate::scalar::Scalar;
use crate::seed::SeedSpec;
use crate::symstat::kernel::Kernel;
use crate::symstat::ustat::{check_block_sizes, size_weighted_mean, u_stat_weighted_rows, v_stat_rows, Evaluation};

#[derive(Debug, Clone, Copy)]
pub struct DbConfig {
    /// Requested replicates `B`.
    pub b: usize,
    pub seed: SeedSpec,
    pub budget: Option<TimeBudget>,
    pub eval: Evaluation,
}

/// Distributed bootstrap of `T_{N,K}`.
///
/// Replicate `b` draws `n_k` rows with replacement inside every block `k`
/// (stream `(k, b)`), recomputes the block statistics and aggregates them;
/// replicates are `sqrt(N) (T*_b - theta)` with `theta` the size-weighted
/// plug-in V-statistic.
pub fn db_run<T, K>(
    table: &DataTable<T>,
    partition: &BlockPartition,
    kernel: &K,
    cfg: &DbConfig,
) -> Result<BootstrapResult<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    require_degree_two(kernel)?;
    kernel.validate_dim(table.ncols())?;
    check_block_sizes(partition, 2)?;
    let ncols = table.ncols();
    let blocks: Vec<Vec<T>> = partition
        .blocks()
        .iter()
        .map(|idx| canonical_rows(table.view(), idx))
        .collect();
    let sizes = partition.sizes();
    let thetas = blocks
        .iter()
        .map(|b| v_stat_rows(RowsView::new(b, ncols), kernel, cfg.eval))
        .collect::<Result<Vec<T>>>()?;
    let center = size_weighted_mean(&thetas, sizes)?;

    let run = run_with_budget(cfg.b, cfg.budget, |b| {
        let mut per_block = Vec::with_capacity(blocks.len());
        for (k, rows) in blocks.iter().enumerate() {
            let mut rng = cfg.seed.stream(k, b);
            let nk = sizes[k];
            let w = multinomial_uniform(&mut rng, nk as u64, nk);
            per_block.push(u_stat_weighted_rows(RowsView::new(rows, ncols), &w, kernel, cfg.eval)?);
        }
        size_weighted_mean(&per_block, sizes)
    })?;

    let n = partition.n();
    let root_n = T::of((n as f64).sqrt());
    Ok(BootstrapResult {
        replicates: run.outputs.iter().map(|&t| root_n * (t - center)).collect(),
        raw_statistics: run.outputs,
        center: Center::Fixed(center),
        scale_convention: ScaleConvention::SqrtN,
        n,
        k: partition.k(),
        requested: cfg.b,
        completed: run.completed,
        budgeted: run.budgeted,
        timestamps: run.timestamps,
    })
}
