//! Full-sample, weighted and block-distributed U-statistics.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{BlockPartition, DataTable, RowsView};
use crate::error::{Error, Result};
use crate::scalar::{binomial, kahan_sum, KahanSum, Scalar};
use crate::symstat::kernel::{Kernel, MAX_DEGREE};

/// Rows above which the outer enumeration loop is split across threads.
const PAR_THRESHOLD: usize = 2048;

/// How a U-statistic is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Evaluation {
    /// Enumerate every index subset.
    #[default]
    Exhaustive,
    /// Use the kernel's closed form when it has one, otherwise enumerate.
    Auto,
}

fn check_kernel<T: Scalar, K: Kernel<T> + ?Sized>(kernel: &K, ncols: usize) -> Result<usize> {
    let m = kernel.degree();
    if m == 0 || m > MAX_DEGREE {
        return Err(Error::invalid(format!("kernel degree must be in 1..={MAX_DEGREE}, got {m}")));
    }
    kernel.validate_dim(ncols)?;
    Ok(m)
}

fn insufficient(needed: usize, got: usize) -> Error {
    Error::InsufficientSample { context: "sample".into(), needed, got }
}

/// Compensated sum of per-item partial sums, evaluated in index order.
fn outer_sum<T, F>(n: usize, f: F) -> T
where
    T: Scalar,
    F: Fn(usize) -> T + Sync + Send,
{
    if n >= PAR_THRESHOLD {
        let parts: Vec<T> = (0..n).into_par_iter().map(&f).collect();
        kahan_sum(parts)
    } else {
        let mut acc = KahanSum::new();
        for i in 0..n {
            acc.add(f(i));
        }
        acc.total()
    }
}

fn enumerate_sum<T: Scalar, K: Kernel<T> + ?Sized>(rows: RowsView<'_, T>, kernel: &K, m: usize) -> T {
    let n = rows.len();
    match m {
        1 => outer_sum(n, |i| kernel.eval(&[rows.row(i)])),
        2 => outer_sum(n, |i| {
            let x = rows.row(i);
            let mut s = T::zero();
            for j in i + 1..n {
                s = s + kernel.eval2(x, rows.row(j));
            }
            s
        }),
        3 => outer_sum(n, |i| {
            let mut s = T::zero();
            for j in i + 1..n {
                for l in j + 1..n {
                    s = s + kernel.eval(&[rows.row(i), rows.row(j), rows.row(l)]);
                }
            }
            s
        }),
        4 => outer_sum(n, |i| {
            let mut s = T::zero();
            for j in i + 1..n {
                for l in j + 1..n {
                    for r in l + 1..n {
                        s = s + kernel.eval(&[rows.row(i), rows.row(j), rows.row(l), rows.row(r)]);
                    }
                }
            }
            s
        }),
        _ => unreachable!("degree checked by caller"),
    }
}

/// U-statistic of `kernel` over the rows of `rows`.
pub fn u_stat_rows<T, K>(rows: RowsView<'_, T>, kernel: &K, eval: Evaluation) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    let m = check_kernel(kernel, rows.ncols())?;
    let n = rows.len();
    if n < m {
        return Err(insufficient(m, n));
    }
    if eval == Evaluation::Auto {
        if let Some(v) = kernel.u_closed_form(rows) {
            return Ok(v);
        }
    }
    Ok(enumerate_sum(rows, kernel, m) / binomial::<T>(n as u64, m as u64))
}

/// Exhaustive U-statistic over all size-`m` row subsets of `table`.
pub fn u_stat<T, K>(table: &DataTable<T>, kernel: &K) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    u_stat_rows(table.view(), kernel, Evaluation::Exhaustive)
}

pub fn u_stat_with<T, K>(table: &DataTable<T>, kernel: &K, eval: Evaluation) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    u_stat_rows(table.view(), kernel, eval)
}

/// Multiplicity coefficient `prod C(w_i, c_i)` of a non-decreasing index tuple.
fn tuple_coefficient(tuple: &[usize], weights: &[u64]) -> f64 {
    let mut coef = 1.0;
    let mut start = 0;
    while start < tuple.len() {
        let mut end = start + 1;
        while end < tuple.len() && tuple[end] == tuple[start] {
            end += 1;
        }
        coef *= binomial::<f64>(weights[tuple[start]], (end - start) as u64);
        start = end;
    }
    coef
}

#[allow(clippy::too_many_arguments)]
fn weighted_rec<T: Scalar, K: Kernel<T> + ?Sized>(
    rows: RowsView<'_, T>,
    kernel: &K,
    support: &[usize],
    weights: &[u64],
    m: usize,
    from: usize,
    tuple: &mut [usize; MAX_DEGREE],
    depth: usize,
    acc: &mut T,
) {
    if depth == m {
        let coef = tuple_coefficient(&tuple[..m], weights);
        if coef > 0.0 {
            let mut args: [&[T]; MAX_DEGREE] = [&[]; MAX_DEGREE];
            for (a, &i) in args.iter_mut().zip(&tuple[..m]) {
                *a = rows.row(i);
            }
            *acc = *acc + T::of(coef) * kernel.eval(&args[..m]);
        }
        return;
    }
    for p in from..support.len() {
        let i = support[p];
        let used = tuple[..depth].iter().filter(|&&t| t == i).count() as u64;
        if used >= weights[i] {
            continue;
        }
        tuple[depth] = i;
        weighted_rec(rows, kernel, support, weights, m, p, tuple, depth + 1, acc);
    }
}

/// U-statistic of the multiset in which row `i` appears `weights[i]` times,
/// computed over distinct rows only.
pub fn u_stat_weighted_rows<T, K>(
    rows: RowsView<'_, T>,
    weights: &[u64],
    kernel: &K,
    eval: Evaluation,
) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    let m = check_kernel(kernel, rows.ncols())?;
    if weights.len() != rows.len() {
        return Err(Error::invalid(format!(
            "{} weights for {} rows",
            weights.len(),
            rows.len()
        )));
    }
    let total: u64 = weights.iter().sum();
    if total < m as u64 {
        return Err(insufficient(m, total as usize));
    }
    if eval == Evaluation::Auto {
        if let Some(v) = kernel.u_weighted_closed_form(rows, weights) {
            return Ok(v);
        }
    }
    let support: Vec<usize> = (0..rows.len()).filter(|&i| weights[i] > 0).collect();
    let sum = if m == 2 {
        outer_sum(support.len(), |p| {
            let i = support[p];
            let x = rows.row(i);
            let wi = T::of(weights[i] as f64);
            let mut s = T::of(binomial::<f64>(weights[i], 2)) * kernel.eval2(x, x);
            for &j in &support[p + 1..] {
                s = s + wi * T::of(weights[j] as f64) * kernel.eval2(x, rows.row(j));
            }
            s
        })
    } else {
        outer_sum(support.len(), |p| {
            let mut tuple = [0usize; MAX_DEGREE];
            tuple[0] = support[p];
            let mut acc = T::zero();
            weighted_rec(rows, kernel, &support, weights, m, p, &mut tuple, 1, &mut acc);
            acc
        })
    };
    Ok(sum / binomial::<T>(total, m as u64))
}

/// Exhaustive weighted U-statistic over the rows of `table`.
pub fn u_stat_weighted<T, K>(table: &DataTable<T>, weights: &[u64], kernel: &K) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    u_stat_weighted_rows(table.view(), weights, kernel, Evaluation::Exhaustive)
}

fn require_degree_two<T: Scalar, K: Kernel<T> + ?Sized>(kernel: &K, ncols: usize) -> Result<()> {
    if check_kernel(kernel, ncols)? != 2 {
        return Err(Error::invalid(format!(
            "degree-2 kernel required, got degree {}",
            kernel.degree()
        )));
    }
    Ok(())
}

/// `sum_j h(x_i, x_j)` for every row `i`, diagonal included.
pub fn kernel_row_sums<T, K>(rows: RowsView<'_, T>, kernel: &K, eval: Evaluation) -> Result<Vec<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    require_degree_two(kernel, rows.ncols())?;
    if eval == Evaluation::Auto {
        if let Some(v) = kernel.row_sums_closed_form(rows) {
            return Ok(v);
        }
    }
    let n = rows.len();
    let sums = |i: usize| {
        let x = rows.row(i);
        let mut acc = KahanSum::new();
        for j in 0..n {
            acc.add(kernel.eval2(x, rows.row(j)));
        }
        acc.total()
    };
    Ok(if n >= PAR_THRESHOLD {
        (0..n).into_par_iter().map(sums).collect()
    } else {
        (0..n).map(sums).collect()
    })
}

/// Plug-in V-statistic `n^{-2} sum_i sum_j h(x_i, x_j)` of a degree-2 kernel.
pub fn v_stat_rows<T, K>(rows: RowsView<'_, T>, kernel: &K, eval: Evaluation) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    require_degree_two(kernel, rows.ncols())?;
    let n = rows.len();
    if n == 0 {
        return Err(insufficient(1, 0));
    }
    let diag = kahan_sum(rows.rows().map(|x| kernel.eval2(x, x)));
    let nf = T::of_usize(n);
    if n == 1 {
        return Ok(diag);
    }
    let u = u_stat_rows(rows, kernel, eval)?;
    Ok((nf * (nf - T::one()) * u + diag) / (nf * nf))
}

pub fn v_stat<T, K>(table: &DataTable<T>, kernel: &K, eval: Evaluation) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    v_stat_rows(table.view(), kernel, eval)
}

/// Empirical first Hoeffding projection `2 (n^{-1} sum_j h(x_i, x_j) - theta)`,
/// with `theta` the plug-in V-statistic of the rows.
pub fn hoeffding_alpha_hat_rows<T, K>(rows: RowsView<'_, T>, kernel: &K, eval: Evaluation) -> Result<Vec<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    require_degree_two(kernel, rows.ncols())?;
    let n = rows.len();
    if n < 2 {
        return Err(insufficient(2, n));
    }
    let sums = kernel_row_sums(rows, kernel, eval)?;
    let nf = T::of_usize(n);
    let means: Vec<T> = sums.iter().map(|&s| s / nf).collect();
    let theta = kahan_sum(means.iter().copied()) / nf;
    let two = T::of(2.0);
    Ok(means.into_iter().map(|g| two * (g - theta)).collect())
}

pub fn hoeffding_alpha_hat<T, K>(block: &DataTable<T>, kernel: &K) -> Result<Vec<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    hoeffding_alpha_hat_rows(block.view(), kernel, Evaluation::Exhaustive)
}

/// Block-wise statistics and their size-weighted aggregate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributedEstimate<T> {
    pub per_block: Vec<T>,
    pub sizes: Vec<usize>,
    pub aggregate: T,
}

impl<T: Scalar> DistributedEstimate<T> {
    /// Builds the estimate, aggregating in block order.
    pub fn from_blocks(per_block: Vec<T>, sizes: Vec<usize>) -> Result<Self> {
        let aggregate = size_weighted_mean(&per_block, &sizes)?;
        Ok(Self { per_block, sizes, aggregate })
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// `N^{-1} sum_k n_k v_k`, summed in block order.
pub fn size_weighted_mean<T: Scalar>(values: &[T], sizes: &[usize]) -> Result<T> {
    if values.len() != sizes.len() || values.is_empty() {
        return Err(Error::invalid(format!(
            "{} block values for {} block sizes",
            values.len(),
            sizes.len()
        )));
    }
    let n: usize = sizes.iter().sum();
    if n == 0 {
        return Err(Error::invalid("block sizes sum to zero"));
    }
    if let [single] = values {
        return Ok(*single);
    }
    let total = kahan_sum(values.iter().zip(sizes).map(|(&v, &s)| T::of_usize(s) * v));
    Ok(total / T::of_usize(n))
}

/// Applies `f` to every block of `partition` (rows gathered contiguously)
/// and returns the results in block order.
pub(crate) fn map_blocks<T, R, F>(table: &DataTable<T>, partition: &BlockPartition, f: F) -> Result<Vec<R>>
where
    T: Scalar,
    R: Send,
    F: Fn(usize, RowsView<'_, T>) -> Result<R> + Sync + Send,
{
    if partition.n() != table.nrows() {
        return Err(Error::invalid(format!(
            "partition covers {} rows but table has {}",
            partition.n(),
            table.nrows()
        )));
    }
    let ncols = table.ncols();
    (0..partition.k())
        .into_par_iter()
        .map(|k| {
            let buf = partition.gather(table, k);
            f(k, RowsView::new(&buf, ncols))
        })
        .collect()
}

pub(crate) fn check_block_sizes(partition: &BlockPartition, needed: usize) -> Result<()> {
    match partition.sizes().iter().position(|&s| s < needed) {
        Some(k) => Err(Error::short_block(k, needed, partition.sizes()[k])),
        None => Ok(()),
    }
}

pub fn distributed_u_stat_with<T, K>(
    table: &DataTable<T>,
    partition: &BlockPartition,
    kernel: &K,
    eval: Evaluation,
) -> Result<DistributedEstimate<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    let m = check_kernel(kernel, table.ncols())?;
    check_block_sizes(partition, m)?;
    let per_block = map_blocks(table, partition, |_, rows| u_stat_rows(rows, kernel, eval))?;
    DistributedEstimate::from_blocks(per_block, partition.sizes().to_vec())
}

/// Split-and-conquer U-statistic `T_{N,K} = N^{-1} sum_k n_k T^{(k)}`.
pub fn distributed_u_stat<T, K>(
    table: &DataTable<T>,
    partition: &BlockPartition,
    kernel: &K,
) -> Result<DistributedEstimate<T>>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    distributed_u_stat_with(table, partition, kernel, Evaluation::Exhaustive)
}

/// Size-weighted aggregate of per-block plug-in V-statistics.
pub fn distributed_v_stat<T, K>(
    table: &DataTable<T>,
    partition: &BlockPartition,
    kernel: &K,
    eval: Evaluation,
) -> Result<T>
where
    T: Scalar,
    K: Kernel<T> + ?Sized,
{
    require_degree_two(kernel, table.ncols())?;
    check_block_sizes(partition, 1)?;
    let per_block = map_blocks(table, partition, |_, rows| v_stat_rows(rows, kernel, eval))?;
    size_weighted_mean(&per_block, partition.sizes())
}
