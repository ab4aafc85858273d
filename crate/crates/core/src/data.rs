//! Observation tables and block partitions.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::SeedSpec;

/// Default lower bound on pairwise block-size ratios used by [`check_balance`].
pub const DEFAULT_C1: f64 = 0.5;
/// Default upper bound on pairwise block-size ratios used by [`check_balance`].
pub const DEFAULT_C2: f64 = 2.0;

const PARTITION_TAG: u64 = 0x7061_7274;

/// Borrowed row-major view of `len` rows with `ncols` columns each.
#[derive(Debug, Clone, Copy)]
pub struct RowsView<'a, T> {
    values: &'a [T],
    ncols: usize,
}

impl<'a, T: Copy> RowsView<'a, T> {
    /// Panics if `values.len()` is not a multiple of `ncols`.
    pub fn new(values: &'a [T], ncols: usize) -> Self {
        assert!(ncols > 0 && values.len().is_multiple_of(ncols), "ragged row-major buffer");
        Self { values, ncols }
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.ncols
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &'a [T] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'a, T> {
        self.values.chunks_exact(self.ncols)
    }

    pub fn values(&self) -> &'a [T] {
        self.values
    }

    /// Copies the given rows into a fresh row-major buffer.
    pub fn gather(&self, indices: &[usize]) -> Vec<T> {
        let mut out = Vec::with_capacity(indices.len() * self.ncols);
        for &i in indices {
            out.extend_from_slice(self.row(i));
        }
        out
    }
}

/// Immutable `N x d` matrix of finite observations, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable<T> {
    values: Vec<T>,
    nrows: usize,
    ncols: usize,
    column_names: Option<Vec<String>>,
}

impl<T: Scalar> DataTable<T> {
    /// Builds a table from row-major values.
    pub fn new(values: Vec<T>, nrows: usize, ncols: usize) -> Result<Self> {
        if nrows == 0 || ncols == 0 {
            return Err(Error::invalid(format!("table must be non-empty, got {nrows}x{ncols}")));
        }
        if values.len() != nrows * ncols {
            return Err(Error::invalid(format!(
                "{} values cannot fill a {nrows}x{ncols} table",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / ncols, col: pos % ncols });
        }
        Ok(Self { values, nrows, ncols, column_names: None })
    }

    /// Single-column table.
    pub fn from_column(values: Vec<T>) -> Result<Self> {
        let n = values.len();
        Self::new(values, n, 1)
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
            return Err(Error::invalid(format!(
                "row {i} has {} columns, expected {ncols}",
                rows[i].len()
            )));
        }
        Self::new(rows.concat(), rows.len(), ncols)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.ncols {
            return Err(Error::invalid(format!(
                "{} column names for {} columns",
                names.len(),
                self.ncols
            )));
        }
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.values.chunks_exact(self.ncols)
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn view(&self) -> RowsView<'_, T> {
        RowsView::new(&self.values, self.ncols)
    }

    /// Row-major backing slice.
    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    /// New table holding the given rows in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.ncols);
        for &i in indices {
            if i >= self.nrows {
                return Err(Error::invalid(format!("row index {i} out of range 0..{}", self.nrows)));
            }
            values.extend_from_slice(self.row(i));
        }
        let mut t = Self::new(values, indices.len(), self.ncols)?;
        t.column_names = self.column_names.clone();
        Ok(t)
    }

    /// New table holding the given columns.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&j) = cols.iter().find(|&&j| j >= self.ncols) {
            return Err(Error::invalid(format!("column index {j} out of range 0..{}", self.ncols)));
        }
        let mut values = Vec::with_capacity(self.nrows * cols.len());
        for r in self.rows() {
            values.extend(cols.iter().map(|&j| r[j]));
        }
        let mut t = Self::new(values, self.nrows, cols.len())?;
        t.column_names = self
            .column_names
            .as_ref()
            .map(|names| cols.iter().map(|&j| names[j].clone()).collect());
        Ok(t)
    }
}

/// Assignment of row indices to `K` non-empty blocks.
///
/// Within each block, member indices are kept in ascending order so that a
/// single-block partition visits rows exactly as the unpartitioned table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    assignment: Vec<usize>,
    sizes: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl BlockPartition {
    fn from_members(members: Vec<Vec<usize>>, n: usize) -> Self {
        let mut assignment = vec![0; n];
        for (k, block) in members.iter().enumerate() {
            for &i in block {
                assignment[i] = k;
            }
        }
        let sizes = members.iter().map(Vec::len).collect();
        Self { assignment, sizes, members }
    }

    /// Number of blocks `K`.
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of rows `N`.
    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Ascending row indices of block `k`.
    pub fn block(&self, k: usize) -> &[usize] {
        &self.members[k]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn min_size(&self) -> usize {
        self.sizes.iter().copied().min().unwrap_or(0)
    }

    pub fn max_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    /// `max_k n_k / min_k n_k`.
    pub fn balance_ratio(&self) -> f64 {
        self.max_size() as f64 / self.min_size() as f64
    }

    /// Row-major copy of block `k` of `table`.
    pub fn gather<T: Scalar>(&self, table: &DataTable<T>, k: usize) -> Vec<T> {
        table.view().gather(&self.members[k])
    }

    /// Materializes block `k` of `table`.
    pub fn extract<T: Scalar>(&self, table: &DataTable<T>, k: usize) -> Result<DataTable<T>> {
        if table.nrows() != self.n() {
            return Err(Error::invalid(format!(
                "partition covers {} rows but table has {}",
                self.n(),
                table.nrows()
            )));
        }
        table.select_rows(&self.members[k])
    }
}

/// Splits a uniformly random permutation of `0..n` into `k` contiguous
/// chunks. The first `n mod k` blocks receive one extra row.
pub fn partition_random_n(n: usize, k: usize, seed: &SeedSpec) -> Result<BlockPartition> {
    if k == 0 {
        return Err(Error::invalid("number of blocks must be positive"));
    }
    if k > n {
        return Err(Error::invalid(format!("cannot split {n} rows into {k} non-empty blocks")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    if k > 1 {
        let mut rng = seed.child(PARTITION_TAG).stream(0, 0);
        perm.shuffle(&mut rng);
    }
    let (base, extra) = (n / k, n % k);
    let mut members = Vec::with_capacity(k);
    let mut start = 0;
    for b in 0..k {
        let len = base + usize::from(b < extra);
        let mut block = perm[start..start + len].to_vec();
        block.sort_unstable();
        members.push(block);
        start += len;
    }
    Ok(BlockPartition::from_members(members, n))
}

/// Random balanced partition of the rows of `table`.
pub fn partition_random<T: Scalar>(
    table: &DataTable<T>,
    k: usize,
    seed: &SeedSpec,
) -> Result<BlockPartition> {
    partition_random_n(table.nrows(), k, seed)
}

/// Wraps an explicit row-to-block assignment.
pub fn partition_predefined(assignment: &[usize]) -> Result<BlockPartition> {
    if assignment.is_empty() {
        return Err(Error::invalid("assignment is empty"));
    }
    let k = assignment.iter().copied().max().unwrap_or(0) + 1;
    let mut members = vec![Vec::new(); k];
    for (i, &b) in assignment.iter().enumerate() {
        members[b].push(i);
    }
    if let Some(b) = members.iter().position(Vec::is_empty) {
        return Err(Error::invalid(format!("block {b} is empty")));
    }
    Ok(BlockPartition::from_members(members, assignment.len()))
}

/// Outcome of [`check_balance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceReport {
    pub balanced: bool,
    /// `min_k n_k / max_k n_k`.
    pub min_ratio: f64,
    /// `max_k n_k / min_k n_k`.
    pub max_ratio: f64,
}

/// Checks `c1 <= n_a / n_b <= c2` over all block pairs.
pub fn check_balance(p: &BlockPartition, c1: f64, c2: f64) -> BalanceReport {
    let (lo, hi) = (p.min_size() as f64, p.max_size() as f64);
    let min_ratio = lo / hi;
    let max_ratio = hi / lo;
    BalanceReport { balanced: c1 <= min_ratio && max_ratio <= c2, min_ratio, max_ratio }
}
