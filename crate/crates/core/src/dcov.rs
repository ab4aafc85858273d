//! Unbiased distance covariance, its distributed version and independence
//! tests built on it.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{BlockPartition, DataTable, RowsView};
use crate::error::{Error, Result};
use crate::scalar::{kahan_sum, KahanSum, Scalar};
use crate::symstat::ustat::{check_block_sizes, size_weighted_mean};

/// Row-aligned pair of samples `Y` (`N x p`) and `Z` (`N x q`).
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample<T> {
    y: DataTable<T>,
    z: DataTable<T>,
}

impl<T: Scalar> PairSample<T> {
    pub fn new(y: DataTable<T>, z: DataTable<T>) -> Result<Self> {
        if y.nrows() != z.nrows() {
            return Err(Error::invalid(format!(
                "Y has {} rows but Z has {}",
                y.nrows(),
                z.nrows()
            )));
        }
        Ok(Self { y, z })
    }

    pub fn y(&self) -> &DataTable<T> {
        &self.y
    }

    pub fn z(&self) -> &DataTable<T> {
        &self.z
    }

    pub fn nrows(&self) -> usize {
        self.y.nrows()
    }
}

#[inline]
fn euclid<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = (*x - *y).as_f64();
        s += d * d;
    }
    s.sqrt()
}

/// Sufficient sums of two distance matrices `A`, `B` (zero diagonals):
/// row sums and `sum_{i != j} A_ij B_ij`.
struct CrossSums {
    a_rows: Vec<f64>,
    b_rows: Vec<f64>,
    ab: f64,
    aa: f64,
    bb: f64,
}

fn cross_sums<T: Scalar>(y: RowsView<'_, T>, z: RowsView<'_, T>) -> CrossSums {
    let n = y.len();
    let mut a_rows = vec![0.0; n];
    let mut b_rows = vec![0.0; n];
    let (mut ab, mut aa, mut bb) = (KahanSum::<f64>::new(), KahanSum::<f64>::new(), KahanSum::<f64>::new());
    for i in 0..n {
        let (yi, zi) = (y.row(i), z.row(i));
        let (mut sab, mut saa, mut sbb, mut sa, mut sb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for j in i + 1..n {
            let a = euclid(yi, y.row(j));
            let b = euclid(zi, z.row(j));
            sab += a * b;
            saa += a * a;
            sbb += b * b;
            sa += a;
            sb += b;
            a_rows[j] += a;
            b_rows[j] += b;
        }
        a_rows[i] += sa;
        b_rows[i] += sb;
        ab.add(2.0 * sab);
        aa.add(2.0 * saa);
        bb.add(2.0 * sbb);
    }
    CrossSums { a_rows, b_rows, ab: ab.total(), aa: aa.total(), bb: bb.total() }
}

/// Three-sum estimator from row sums `a`, `b` and `s1 = sum_{i != j} A_ij B_ij`.
fn three_sum(n: usize, a: &[f64], b: &[f64], s1: f64) -> f64 {
    let nf = n as f64;
    let dot = kahan_sum(a.iter().zip(b).map(|(x, y)| x * y));
    let (ta, tb) = (kahan_sum(a.iter().copied()), kahan_sum(b.iter().copied()));
    // sum over distinct (i, j, l) of A_ij B_il
    let s2 = dot - s1;
    // sum over distinct (i, j, l1, l2) of A_ij B_l1l2
    let s3 = ta * tb - 4.0 * dot + 2.0 * s1;
    let d2 = nf * (nf - 1.0);
    let d3 = d2 * (nf - 2.0);
    let d4 = d3 * (nf - 3.0);
    s1 / d2 - 2.0 * s2 / d3 + s3 / d4
}

fn check_pair<T: Scalar>(y: RowsView<'_, T>, z: RowsView<'_, T>) -> Result<()> {
    if y.len() != z.len() {
        return Err(Error::invalid(format!("Y has {} rows but Z has {}", y.len(), z.len())));
    }
    if y.len() < 4 {
        return Err(Error::InsufficientSample { context: "sample".into(), needed: 4, got: y.len() });
    }
    Ok(())
}

/// Unbiased squared distance covariance of row-aligned `y` and `z`,
/// evaluated in O(N^2) time and O(N) memory.
pub fn dcov_unbiased_rows<T: Scalar>(y: RowsView<'_, T>, z: RowsView<'_, T>) -> Result<T> {
    check_pair(y, z)?;
    let s = cross_sums(y, z);
    Ok(T::of(three_sum(y.len(), &s.a_rows, &s.b_rows, s.ab)))
}

pub fn dcov_unbiased<T: Scalar>(pair: &PairSample<T>) -> Result<T> {
    dcov_unbiased_rows(pair.y.view(), pair.z.view())
}

/// `(dcov(Y,Z), dcov(Y,Y), dcov(Z,Z))` from one pass over the pairs.
pub fn dcov_triple_rows<T: Scalar>(y: RowsView<'_, T>, z: RowsView<'_, T>) -> Result<[T; 3]> {
    check_pair(y, z)?;
    let n = y.len();
    let s = cross_sums(y, z);
    Ok([
        T::of(three_sum(n, &s.a_rows, &s.b_rows, s.ab)),
        T::of(three_sum(n, &s.a_rows, &s.a_rows, s.aa)),
        T::of(three_sum(n, &s.b_rows, &s.b_rows, s.bb)),
    ])
}

/// Per-block distance covariances and their size-weighted aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcovBlockSummary<T> {
    pub yz: Vec<T>,
    pub yy: Vec<T>,
    pub zz: Vec<T>,
    pub sizes: Vec<usize>,
    pub aggregate_yz: T,
    pub aggregate_yy: T,
    pub aggregate_zz: T,
}

impl<T: Scalar> DcovBlockSummary<T> {
    pub fn from_blocks(yz: Vec<T>, yy: Vec<T>, zz: Vec<T>, sizes: Vec<usize>) -> Result<Self> {
        Ok(Self {
            aggregate_yz: size_weighted_mean(&yz, &sizes)?,
            aggregate_yy: size_weighted_mean(&yy, &sizes)?,
            aggregate_zz: size_weighted_mean(&zz, &sizes)?,
            yz,
            yy,
            zz,
            sizes,
        })
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }
}

/// Distributed distance covariance over the blocks of `partition`.
pub fn dcov_distributed<T: Scalar>(pair: &PairSample<T>, partition: &BlockPartition) -> Result<DcovBlockSummary<T>> {
    use rayon::prelude::*;
    if partition.n() != pair.nrows() {
        return Err(Error::invalid(format!(
            "partition covers {} rows but the sample has {}",
            partition.n(),
            pair.nrows()
        )));
    }
    check_block_sizes(partition, 4)?;
    let (p, q) = (pair.y.ncols(), pair.z.ncols());
    let triples = (0..partition.k())
        .into_par_iter()
        .map(|k| {
            let yb = partition.gather(&pair.y, k);
            let zb = partition.gather(&pair.z, k);
            dcov_triple_rows(RowsView::new(&yb, p), RowsView::new(&zb, q))
        })
        .collect::<Result<Vec<[T; 3]>>>()?;
    let yz = triples.iter().map(|t| t[0]).collect();
    let yy = triples.iter().map(|t| t[1]).collect();
    let zz = triples.iter().map(|t| t[2]).collect();
    DcovBlockSummary::from_blocks(yz, yy, zz, partition.sizes().to_vec())
}

/// `4 * dcov_{N,K}(Y,Y) * dcov_{N,K}(Z,Z)`; may be nonpositive in finite
/// samples.
pub fn sigma_beta_hat<T: Scalar>(summary: &DcovBlockSummary<T>) -> T {
    T::of(4.0) * summary.aggregate_yy * summary.aggregate_zz
}

/// Block dispersion `K^{-2} sum_k (d_k - d)^2` of the cross covariances.
pub fn block_variance<T: Scalar>(summary: &DcovBlockSummary<T>) -> T {
    let k = T::of_usize(summary.k());
    let d = summary.aggregate_yz;
    kahan_sum(summary.yz.iter().map(|&x| (x - d) * (x - d))) / (k * k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TestMethod {
    /// Standardized by the null variance estimate `sigma_beta`.
    Var,
    /// Standardized by the dispersion of the block statistics.
    BlockVar,
}

/// One-sided z-test outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestReport {
    pub method: TestMethod,
    pub statistic: f64,
    /// Upper `level` quantile of the standard normal.
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub level: f64,
    /// Variance estimate used for standardization.
    pub variance: f64,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

fn z_report(method: TestMethod, statistic: f64, level: f64, variance: f64) -> Result<TestReport> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("test level must lie in (0, 1), got {level}")));
    }
    let nd = std_normal();
    let critical_value = nd.inverse_cdf(1.0 - level);
    Ok(TestReport {
        method,
        statistic,
        critical_value,
        p_value: 1.0 - nd.cdf(statistic),
        reject: statistic > critical_value,
        level,
        variance,
    })
}

/// Rejects independence when `sqrt(2/K) N dcov_{N,K} / sigma_beta > z_level`.
pub fn test_var<T: Scalar>(summary: &DcovBlockSummary<T>, level: f64) -> Result<TestReport> {
    let var = sigma_beta_hat(summary).as_f64();
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::InvalidVariance { value: var });
    }
    let (n, k) = (summary.n() as f64, summary.k() as f64);
    let stat = (2.0 / k).sqrt() * n * summary.aggregate_yz.as_f64() / var.sqrt();
    z_report(TestMethod::Var, stat, level, var)
}

fn standardized_by_blocks<T: Scalar>(summary: &DcovBlockSummary<T>) -> Result<(f64, f64)> {
    let k = summary.k();
    if k < 2 {
        return Err(Error::invalid(format!("block-variance standardization needs K >= 2, got {k}")));
    }
    let (lo, hi) = summary
        .sizes
        .iter()
        .fold((usize::MAX, 0), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    if hi - lo > 1 {
        return Err(Error::invalid(format!("block sizes must be equal up to one row, got {lo}..{hi}")));
    }
    let var = block_variance(summary).as_f64();
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::InvalidVariance { value: var });
    }
    Ok((summary.aggregate_yz.as_f64() / var.sqrt(), var))
}

/// Rejects independence when `dcov_{N,K} / sigma_{N,K} > z_level`.
pub fn test_block_var<T: Scalar>(summary: &DcovBlockSummary<T>, level: f64) -> Result<TestReport> {
    let (stat, var) = standardized_by_blocks(summary)?;
    z_report(TestMethod::BlockVar, stat, level, var)
}

/// Standardized dependence measure `dcov_{N,K} / sigma_{N,K}`.
pub fn dependence_measure<T: Scalar>(summary: &DcovBlockSummary<T>) -> Result<f64> {
    Ok(standardized_by_blocks(summary)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{partition_predefined, partition_random_n};
    use crate::seed::SeedSpec;
    use crate::symstat::kernel::FnKernel;
    use crate::symstat::ustat::u_stat;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    /// Literal three-sum over distinct indices, O(N^4).
    fn literal(y: &[Vec<f64>], z: &[Vec<f64>]) -> f64 {
        let n = y.len();
        let a = |i: usize, j: usize| dist(&y[i], &y[j]);
        let b = |i: usize, j: usize| dist(&z[i], &z[j]);
        let (mut t1, mut t2, mut t3) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if j == i {
                    continue;
                }
                t1 += a(i, j) * b(i, j);
                for l in 0..n {
                    if l == i || l == j {
                        continue;
                    }
                    t2 += a(i, j) * b(i, l);
                    for r in 0..n {
                        if r == i || r == j || r == l {
                            continue;
                        }
                        t3 += a(i, j) * b(l, r);
                    }
                }
            }
        }
        let nf = n as f64;
        t1 / (nf * (nf - 1.0)) - 2.0 * t2 / (nf * (nf - 1.0) * (nf - 2.0))
            + t3 / (nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0))
    }

    /// U-centered inner product `(N(N-3))^{-1} sum_{i != j} A~_ij B~_ij`.
    fn u_centered(y: &[Vec<f64>], z: &[Vec<f64>]) -> f64 {
        let n = y.len();
        let nf = n as f64;
        let center = |m: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
            let rows: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m(i, j)).sum()).collect();
            let tot: f64 = rows.iter().sum();
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j {
                                0.0
                            } else {
                                m(i, j) - rows[i] / (nf - 2.0) - rows[j] / (nf - 2.0)
                                    + tot / ((nf - 1.0) * (nf - 2.0))
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let at = center(&|i, j| dist(&y[i], &y[j]));
        let bt = center(&|i, j| dist(&z[i], &z[j]));
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += at[i][j] * bt[i][j];
            }
        }
        s / (nf * (nf - 3.0))
    }

    fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..d).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect()).collect()
    }

    fn pair(y: &[Vec<f64>], z: &[Vec<f64>]) -> PairSample<f64> {
        PairSample::new(DataTable::from_rows(y).unwrap(), DataTable::from_rows(z).unwrap()).unwrap()
    }

    #[test]
    fn constant_z_is_exactly_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = random_rows(&mut rng, 9, 3);
        let z = vec![vec![2.5, -1.0]; 9];
        assert_eq!(dcov_unbiased(&pair(&y, &z)).unwrap(), 0.0);
    }

    #[test]
    fn y_equals_z_integer_example() {
        let y: Vec<Vec<f64>> = [[0.0], [1.0], [3.0], [4.0], [8.0]].iter().map(|r| r.to_vec()).collect();
        let got = dcov_unbiased(&pair(&y, &y)).unwrap();
        assert!((got - literal(&y, &y)).abs() < 1e-10);
        assert!(got > 0.0);
    }

    #[test]
    fn too_small() {
        let y = vec![vec![0.0]; 3];
        assert!(matches!(
            dcov_unbiased(&pair(&y, &y)),
            Err(Error::InsufficientSample { needed: 4, got: 3, .. })
        ));
    }

    #[test]
    fn matches_degree_four_u_statistic() {
        // The estimator is the U-statistic of the symmetrized degree-4 kernel.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = random_rows(&mut rng, 8, 2);
        let z = random_rows(&mut rng, 8, 1);
        let joined: Vec<Vec<f64>> = y.iter().zip(&z).map(|(a, b)| [a.as_slice(), b.as_slice()].concat()).collect();
        let k = FnKernel::new(4, "dcov", |args: &[&[f64]]| {
            let a = |i: usize, j: usize| dist(&args[i][..2], &args[j][..2]);
            let b = |i: usize, j: usize| dist(&args[i][2..], &args[j][2..]);
            let mut s = 0.0;
            let perms = permutations4();
            for p in &perms {
                let (i, j, l, r) = (p[0], p[1], p[2], p[3]);
                s += a(i, j) * b(i, j) - 2.0 * a(i, j) * b(i, l) + a(i, j) * b(l, r);
            }
            s / perms.len() as f64
        })
        .unwrap();
        let u = u_stat(&DataTable::from_rows(&joined).unwrap(), &k).unwrap();
        let d = dcov_unbiased(&pair(&y, &z)).unwrap();
        assert!((u - d).abs() < 1e-10, "{u} vs {d}");
    }

    fn permutations4() -> Vec<[usize; 4]> {
        let mut out = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        if a != b && a != c && a != d && b != c && b != d && c != d {
                            out.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn distributed_single_block_and_twins() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y = random_rows(&mut rng, 20, 2);
        let z = random_rows(&mut rng, 20, 3);
        let ps = pair(&y, &z);
        let p1 = partition_random_n(20, 1, &SeedSpec::new(0)).unwrap();
        let s = dcov_distributed(&ps, &p1).unwrap();
        assert_eq!(s.aggregate_yz, dcov_unbiased(&ps).unwrap());

        let y2 = [y[..10].to_vec(), y[..10].to_vec()].concat();
        let z2 = [z[..10].to_vec(), z[..10].to_vec()].concat();
        let asg: Vec<usize> = (0..20).map(|i| i / 10).collect();
        let s = dcov_distributed(&pair(&y2, &z2), &partition_predefined(&asg).unwrap()).unwrap();
        assert!((s.aggregate_yz - s.yz[0]).abs() < 1e-15);
        assert_eq!(s.yz[0], s.yz[1]);
    }

    #[test]
    fn distributed_names_short_block() {
        let y = vec![vec![0.0]; 9];
        let asg = [0, 0, 0, 0, 0, 0, 1, 1, 1];
        let err = dcov_distributed(&pair(&y, &y), &partition_predefined(&asg).unwrap()).unwrap_err();
        assert_eq!(err, Error::short_block(1, 4, 3));
    }

    fn summary(yz: &[f64], yy: &[f64], zz: &[f64], size: usize) -> DcovBlockSummary<f64> {
        DcovBlockSummary::from_blocks(yz.to_vec(), yy.to_vec(), zz.to_vec(), vec![size; yz.len()]).unwrap()
    }

    #[test]
    fn sigma_beta_examples() {
        assert_eq!(sigma_beta_hat(&summary(&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], 10)), 8.0);
        assert_eq!(sigma_beta_hat(&summary(&[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0], 10)), 0.0);
    }

    #[test]
    fn test_var_examples() {
        let s = summary(&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], 10);
        let r = test_var(&s, 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(!r.reject);
        assert!((r.critical_value - 1.6448536269514722).abs() < 1e-9);
        assert!((r.p_value - 0.5).abs() < 1e-12);
        let s = summary(&[0.1, 0.1], &[1.0, 1.0], &[0.0, 0.0], 10);
        assert!(matches!(test_var(&s, 0.05), Err(Error::InvalidVariance { .. })));
    }

    #[test]
    fn block_var_examples() {
        let v = 0.3;
        let s = summary(&[0.0, 2.0 * v], &[1.0, 1.0], &[1.0, 1.0], 50);
        assert!((block_variance(&s) - v * v / 2.0).abs() < 1e-15);
        let r = test_block_var(&s, 0.05).unwrap();
        assert!((r.statistic - 2f64.sqrt()).abs() < 1e-12);
        assert!((dependence_measure(&s).unwrap() - 2f64.sqrt()).abs() < 1e-12);

        let s = summary(&[0.4; 3], &[1.0; 3], &[1.0; 3], 50);
        assert!(matches!(test_block_var(&s, 0.05), Err(Error::InvalidVariance { .. })));
        let s = DcovBlockSummary::from_blocks(vec![0.0, 1.0], vec![1.0; 2], vec![1.0; 2], vec![10, 20]).unwrap();
        assert!(test_block_var(&s, 0.05).is_err());
    }

    proptest! {
        #[test]
        fn fast_matches_literal(n in 4usize..=9, p in 1usize..=3, q in 1usize..=3, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = random_rows(&mut rng, n, p);
            let z = random_rows(&mut rng, n, q);
            let got = dcov_unbiased(&pair(&y, &z)).unwrap();
            prop_assert!((got - literal(&y, &z)).abs() < 1e-10);
            prop_assert!((got - u_centered(&y, &z)).abs() < 1e-10);
            let [yz, yy, zz] = dcov_triple_rows(pair(&y, &z).y().view(), pair(&y, &z).z().view()).unwrap();
            prop_assert_eq!(yz, got);
            prop_assert!((yy - literal(&y, &y)).abs() < 1e-10);
            prop_assert!((zz - literal(&z, &z)).abs() < 1e-10);
        }

        #[test]
        fn permutation_and_translation_invariance(n in 4usize..=30, shift in -5.0f64..5.0, seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = random_rows(&mut rng, n, 2);
            let z = random_rows(&mut rng, n, 2);
            let base = dcov_unbiased(&pair(&y, &z)).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
            let yp: Vec<Vec<f64>> = order.iter().map(|&i| y[i].iter().map(|v| v + shift).collect()).collect();
            let zp: Vec<Vec<f64>> = order.iter().map(|&i| z[i].clone()).collect();
            let moved = dcov_unbiased(&pair(&yp, &zp)).unwrap();
            prop_assert!((base - moved).abs() < 1e-9 * (1.0 + base.abs()));
        }
    }
}
