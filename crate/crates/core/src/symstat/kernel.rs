//! Symmetric kernels.

use std::sync::Arc;

use crate::data::RowsView;
use crate::error::{Error, Result};
use crate::scalar::{binomial, cmp_scalar, KahanSum, Scalar};

/// Largest supported kernel degree.
pub const MAX_DEGREE: usize = 4;

/// Symmetric kernel `h` of degree `m` acting on observation rows.
///
/// Only [`Kernel::eval`] is required. The remaining hooks let a kernel supply
/// closed forms that the `Auto` evaluation mode uses in place of exhaustive
/// enumeration; each must agree with the enumerated value up to rounding.
pub trait Kernel<T: Scalar>: Send + Sync {
    fn degree(&self) -> usize;

    fn name(&self) -> &str;

    /// `h(args[0], ..., args[m-1])`.
    fn eval(&self, args: &[&[T]]) -> T;

    #[inline]
    fn eval2(&self, x: &[T], y: &[T]) -> T {
        self.eval(&[x, y])
    }

    /// Rejects row dimensions the kernel is not defined for.
    fn validate_dim(&self, _ncols: usize) -> Result<()> {
        Ok(())
    }

    /// Closed-form U-statistic over all rows.
    fn u_closed_form(&self, _rows: RowsView<'_, T>) -> Option<T> {
        None
    }

    /// Closed-form U-statistic over the multiset where row `i` appears
    /// `weights[i]` times.
    fn u_weighted_closed_form(&self, _rows: RowsView<'_, T>, _weights: &[u64]) -> Option<T> {
        None
    }

    /// Closed-form `sum_j h(x_i, x_j)` for every `i`, diagonal included
    /// (degree 2 only).
    fn row_sums_closed_form(&self, _rows: RowsView<'_, T>) -> Option<Vec<T>> {
        None
    }
}

impl<T: Scalar, K: Kernel<T> + ?Sized> Kernel<T> for &K {
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn eval(&self, args: &[&[T]]) -> T {
        (**self).eval(args)
    }
    fn eval2(&self, x: &[T], y: &[T]) -> T {
        (**self).eval2(x, y)
    }
    fn validate_dim(&self, ncols: usize) -> Result<()> {
        (**self).validate_dim(ncols)
    }
    fn u_closed_form(&self, rows: RowsView<'_, T>) -> Option<T> {
        (**self).u_closed_form(rows)
    }
    fn u_weighted_closed_form(&self, rows: RowsView<'_, T>, weights: &[u64]) -> Option<T> {
        (**self).u_weighted_closed_form(rows, weights)
    }
    fn row_sums_closed_form(&self, rows: RowsView<'_, T>) -> Option<Vec<T>> {
        (**self).row_sums_closed_form(rows)
    }
}

fn require_univariate(name: &str, ncols: usize) -> Result<()> {
    if ncols == 1 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} kernel needs 1-D rows, got {ncols} columns")))
    }
}

/// Gini mean difference kernel `h(x, y) = |x - y|` on 1-D rows.
#[derive(Debug, Clone, Copy, Default)]
pub struct GiniKernel;

pub fn gini_kernel() -> GiniKernel {
    GiniKernel
}

/// Sorted values paired with their original positions.
fn sorted_with_index<T: Scalar>(xs: &[T]) -> (Vec<T>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| cmp_scalar(&xs[a], &xs[b]));
    (idx.iter().map(|&i| xs[i]).collect(), idx)
}

fn is_sorted<T: Scalar>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] <= w[1])
}

/// `sum_{i<j} |x_i - x_j|` for sorted `xs`.
fn sorted_pair_abs_sum<T: Scalar>(xs: &[T]) -> T {
    let n = xs.len() as f64;
    let mut acc = KahanSum::new();
    for (j, &x) in xs.iter().enumerate() {
        acc.add(T::of(2.0 * j as f64 - n + 1.0) * x);
    }
    acc.total()
}

impl<T: Scalar> Kernel<T> for GiniKernel {
    fn degree(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "gini"
    }

    #[inline]
    fn eval(&self, args: &[&[T]]) -> T {
        (args[0][0] - args[1][0]).abs()
    }

    #[inline]
    fn eval2(&self, x: &[T], y: &[T]) -> T {
        (x[0] - y[0]).abs()
    }

    fn validate_dim(&self, ncols: usize) -> Result<()> {
        require_univariate("gini", ncols)
    }

    fn u_closed_form(&self, rows: RowsView<'_, T>) -> Option<T> {
        if rows.ncols() != 1 || rows.len() < 2 {
            return None;
        }
        let xs = rows.values();
        let total = if is_sorted(xs) {
            sorted_pair_abs_sum(xs)
        } else {
            let mut s = xs.to_vec();
            s.sort_by(cmp_scalar);
            sorted_pair_abs_sum(&s)
        };
        Some(total / binomial::<T>(xs.len() as u64, 2))
    }

    fn u_weighted_closed_form(&self, rows: RowsView<'_, T>, weights: &[u64]) -> Option<T> {
        if rows.ncols() != 1 || weights.len() != rows.len() {
            return None;
        }
        let total: u64 = weights.iter().sum();
        if total < 2 {
            return None;
        }
        let xs = rows.values();
        let order: Option<Vec<usize>> = if is_sorted(xs) { None } else { Some(sorted_with_index(xs).1) };
        // sum over multiset pairs of |a - b| = sum_j w_j (x_j W_<j - S_<j) in sorted order
        let mut w_before = T::zero();
        let mut s_before = KahanSum::new();
        let mut acc = KahanSum::new();
        for pos in 0..xs.len() {
            let i = order.as_ref().map_or(pos, |o| o[pos]);
            let w = weights[i];
            if w == 0 {
                continue;
            }
            let wf = T::of(w as f64);
            let x = xs[i];
            acc.add(wf * (x * w_before - s_before.total()));
            w_before = w_before + wf;
            s_before.add(wf * x);
        }
        Some(acc.total() / binomial::<T>(total, 2))
    }

    fn row_sums_closed_form(&self, rows: RowsView<'_, T>) -> Option<Vec<T>> {
        if rows.ncols() != 1 {
            return None;
        }
        let xs = rows.values();
        let n = xs.len();
        let (sorted, idx) = sorted_with_index(xs);
        let grand = sorted.iter().fold(KahanSum::new(), |mut a, &x| {
            a.add(x);
            a
        });
        let grand = grand.total();
        let mut out = vec![T::zero(); n];
        let mut prefix = KahanSum::new();
        for (j, &x) in sorted.iter().enumerate() {
            let below = prefix.total();
            let above = grand - below - x;
            let jf = T::of_usize(j);
            let upper = T::of_usize(n - j - 1);
            out[idx[j]] = (x * jf - below) + (above - x * upper);
            prefix.add(x);
        }
        Some(out)
    }
}

/// Product kernel `h(x, y) = (x - c)(y - c)` on 1-D rows.
///
/// Degenerate when `c` equals the population mean.
#[derive(Debug, Clone, Copy)]
pub struct ProductKernel<T> {
    pub c: T,
}

pub fn product_kernel<T: Scalar>(c: T) -> ProductKernel<T> {
    ProductKernel { c }
}

impl<T: Scalar> Kernel<T> for ProductKernel<T> {
    fn degree(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "product"
    }

    #[inline]
    fn eval(&self, args: &[&[T]]) -> T {
        (args[0][0] - self.c) * (args[1][0] - self.c)
    }

    #[inline]
    fn eval2(&self, x: &[T], y: &[T]) -> T {
        (x[0] - self.c) * (y[0] - self.c)
    }

    fn validate_dim(&self, ncols: usize) -> Result<()> {
        require_univariate("product", ncols)
    }

    fn u_closed_form(&self, rows: RowsView<'_, T>) -> Option<T> {
        let n = rows.len();
        if rows.ncols() != 1 || n < 2 {
            return None;
        }
        let mut s = KahanSum::new();
        let mut q = KahanSum::new();
        for &x in rows.values() {
            let y = x - self.c;
            s.add(y);
            q.add(y * y);
        }
        let s = s.total();
        Some((s * s - q.total()) / T::of((n * (n - 1)) as f64))
    }

    fn u_weighted_closed_form(&self, rows: RowsView<'_, T>, weights: &[u64]) -> Option<T> {
        if rows.ncols() != 1 || weights.len() != rows.len() {
            return None;
        }
        let total: u64 = weights.iter().sum();
        if total < 2 {
            return None;
        }
        let mut s = KahanSum::new();
        let mut q = KahanSum::new();
        for (&x, &w) in rows.values().iter().zip(weights) {
            if w == 0 {
                continue;
            }
            let y = x - self.c;
            let wf = T::of(w as f64);
            s.add(wf * y);
            q.add(wf * y * y);
        }
        let s = s.total();
        Some((s * s - q.total()) / T::of(total as f64 * (total - 1) as f64))
    }

    fn row_sums_closed_form(&self, rows: RowsView<'_, T>) -> Option<Vec<T>> {
        if rows.ncols() != 1 {
            return None;
        }
        let s = rows.values().iter().fold(KahanSum::new(), |mut a, &x| {
            a.add(x - self.c);
            a
        });
        let s = s.total();
        Some(rows.values().iter().map(|&x| (x - self.c) * s).collect())
    }
}

type KernelFn<T> = dyn Fn(&[&[T]]) -> T + Send + Sync;

/// Kernel backed by an arbitrary symmetric closure.
#[derive(Clone)]
pub struct FnKernel<T> {
    degree: usize,
    name: String,
    dim: Option<usize>,
    f: Arc<KernelFn<T>>,
}

impl<T> std::fmt::Debug for FnKernel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnKernel")
            .field("degree", &self.degree)
            .field("name", &self.name)
            .field("dim", &self.dim)
            .finish()
    }
}

impl<T: Scalar> FnKernel<T> {
    /// Degrees outside `1..=4` are rejected.
    pub fn new<F>(degree: usize, name: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[&[T]]) -> T + Send + Sync + 'static,
    {
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::invalid(format!(
                "kernel degree must be in 1..={MAX_DEGREE}, got {degree}"
            )));
        }
        Ok(Self { degree, name: name.into(), dim: None, f: Arc::new(f) })
    }

    /// Restricts the kernel to rows with exactly `dim` columns.
    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }
}

impl<T: Scalar> Kernel<T> for FnKernel<T> {
    fn degree(&self) -> usize {
        self.degree
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, args: &[&[T]]) -> T {
        (self.f)(args)
    }

    fn validate_dim(&self, ncols: usize) -> Result<()> {
        match self.dim {
            Some(d) if d != ncols => Err(Error::invalid(format!(
                "{} kernel needs {d}-D rows, got {ncols} columns",
                self.name
            ))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2<K: Kernel<f64>>(k: &K, x: f64, y: f64) -> f64 {
        k.eval(&[&[x], &[y]])
    }

    #[test]
    fn gini_values() {
        assert_eq!(h2(&GiniKernel, 0.0, 2.0), 2.0);
        assert_eq!(h2(&GiniKernel, 1.5, 1.5), 0.0);
        assert_eq!(h2(&GiniKernel, -1.0, 3.0), 4.0);
        assert!(Kernel::<f64>::validate_dim(&GiniKernel, 2).is_err());
    }

    #[test]
    fn product_values() {
        let k = product_kernel(2.0);
        assert_eq!(h2(&k, 2.0, 7.0), 0.0);
        assert_eq!(h2(&product_kernel(1.0), 0.0, 0.0), 1.0);
    }

    #[test]
    fn fn_kernel_degree_bounds() {
        assert!(FnKernel::<f64>::new(0, "z", |_| 0.0).is_err());
        assert!(FnKernel::<f64>::new(5, "big", |_| 0.0).is_err());
        assert!(FnKernel::<f64>::new(4, "ok", |_| 0.0).is_ok());
        let k = FnKernel::<f64>::new(2, "d", |_| 0.0).unwrap().with_dim(3);
        assert!(k.validate_dim(2).is_err());
        assert!(k.validate_dim(3).is_ok());
    }

    #[test]
    fn gini_row_sums_match_enumeration() {
        let xs = [3.0f64, -1.0, 2.5, 2.5, 0.0, 7.0];
        let rows = RowsView::new(&xs, 1);
        let fast = GiniKernel.row_sums_closed_form(rows).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let slow: f64 = xs.iter().map(|&y| (x - y).abs()).sum();
            assert!((fast[i] - slow).abs() < 1e-12);
        }
    }

    #[test]
    fn product_row_sums_match_enumeration() {
        let xs = [3.0f64, -1.0, 2.5, 0.0];
        let k = product_kernel(0.5);
        let fast = k.row_sums_closed_form(RowsView::new(&xs, 1)).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let slow: f64 = xs.iter().map(|&y| (x - 0.5) * (y - 0.5)).sum();
            assert!((fast[i] - slow).abs() < 1e-12);
        }
    }
}
