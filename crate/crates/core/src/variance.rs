//! Variance estimators for degree-2 U-statistics and bootstrap replicates.

use serde::Serialize;

use crate::data::{BlockPartition, DataTable, RowsView};
use crate::error::{Error, Result};
use crate::scalar::{kahan_sum, KahanSum, Scalar};
use crate::symstat::kernel::{GiniKernel, Kernel};
use crate::symstat::ustat::{
    check_block_sizes, hoeffding_alpha_hat_rows, kernel_row_sums, map_blocks, size_weighted_mean, Evaluation,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarianceMethod {
    Jackknife,
    DistributedJackknife,
    SigmaAlpha,
    BootstrapSample,
}

/// Estimate of the variance of a target statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceEstimate<T> {
    pub value: T,
    pub method: VarianceMethod,
    /// Per-block contributions, when the estimator is block-wise.
    pub components: Option<Vec<T>>,
}

/// Jackknife output: `s2` estimates the asymptotic variance of
/// `sqrt(N) U_N`, and `var_hat = s2 / N` the variance of `U_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jackknife<T> {
    pub s2: T,
    pub var_hat: T,
}

/// Jackknife variance of a degree-2 U-statistic:
/// `S^2 = 4 (N-1) (N-2)^{-2} sum_i (q_i - U)^2` with `q_i` the mean kernel
/// value between row `i` and the other rows.
pub fn jackknife_u_variance<T, K>(rows: RowsView<'_, T>, kernel: &K, eval: Evaluation) -> Result<Jackknife<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    let n = rows.len();
    if n < 3 {
        return Err(Error::InsufficientSample { context: "sample".into(), needed: 3, got: n });
    }
    let sums = kernel_row_sums(rows, kernel, eval)?;
    // r_i = (N - 1) q_i; with d_i = N r_i - sum_j r_j the estimator is
    // 4 sum_i d_i^2 / ((N-2)^2 N^2 (N-1)), divided once at the end.
    let r: Vec<T> = sums.iter().zip(rows.rows()).map(|(&s, x)| s - kernel.eval2(x, x)).collect();
    let nf = T::of_usize(n);
    let total = kahan_sum(r.iter().copied());
    let ss = kahan_sum(r.iter().map(|&ri| {
        let d = nf * ri - total;
        d * d
    }));
    let nm2 = T::of_usize(n - 2);
    let denom = nm2 * nm2 * nf * nf * T::of_usize(n - 1);
    let four = T::of(4.0);
    let s2 = four * ss / denom;
    let var_hat = four * ss / (denom * nf);
    Ok(Jackknife { s2, var_hat })
}

/// Jackknife variance of the Gini mean difference of `sample`.
pub fn jackknife_gini_variance<T: Scalar>(sample: &[T]) -> Result<Jackknife<T>> {
    if let Some(i) = sample.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    jackknife_u_variance(RowsView::new(sample, 1), &GiniKernel, Evaluation::Auto)
}

/// Distributed jackknife: `S^2_{N,K} = N^{-1} sum_k n_k S_k^2`, reported as
/// `S^2_{N,K} / N`. Components hold the per-block `S_k^2`.
pub fn distributed_jackknife_variance_with<T, K>(
    table: &DataTable<T>,
    partition: &BlockPartition,
    kernel: &K,
    eval: Evaluation,
) -> Result<VarianceEstimate<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    check_block_sizes(partition, 3)?;
    let per_block = map_blocks(table, partition, |_, rows| jackknife_u_variance(rows, kernel, eval))?;
    let s2: Vec<T> = per_block.iter().map(|j| j.s2).collect();
    let value = if let [single] = per_block.as_slice() {
        single.var_hat
    } else {
        size_weighted_mean(&s2, partition.sizes())? / T::of_usize(partition.n())
    };
    Ok(VarianceEstimate {
        value,
        method: VarianceMethod::DistributedJackknife,
        components: Some(s2),
    })
}

/// Distributed jackknife for the Gini mean difference.
pub fn distributed_jackknife_variance<T: Scalar>(
    table: &DataTable<T>,
    partition: &BlockPartition,
) -> Result<VarianceEstimate<T>> {
    distributed_jackknife_variance_with(table, partition, &GiniKernel, Evaluation::Auto)
}

/// `N^{-1} sum_k sum_i alpha_hat_{k,i}^2`, the pooled estimate of the
/// variance of the first Hoeffding projection.
pub fn sigma_alpha_hat<T, K>(
    table: &DataTable<T>,
    partition: &BlockPartition,
    kernel: &K,
    eval: Evaluation,
) -> Result<VarianceEstimate<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    check_block_sizes(partition, 2)?;
    let per_block = map_blocks(table, partition, |_, rows| {
        let a = hoeffding_alpha_hat_rows(rows, kernel, eval)?;
        Ok(kahan_sum(a.iter().map(|&x| x * x)) / T::of_usize(a.len()))
    })?;
    Ok(VarianceEstimate {
        value: size_weighted_mean(&per_block, partition.sizes())?,
        method: VarianceMethod::SigmaAlpha,
        components: Some(per_block),
    })
}

/// Sample variance with divisor `B`.
pub fn population_variance<T: Scalar>(values: &[T]) -> Result<T> {
    let b = values.len();
    if b < 2 {
        return Err(Error::InsufficientReplicates { needed: 2, got: b });
    }
    let bf = T::of_usize(b);
    let mean = kahan_sum(values.iter().copied()) / bf;
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add((v - mean) * (v - mean));
    }
    Ok(acc.total() / bf)
}
