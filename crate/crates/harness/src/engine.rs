//! Uniform front end over the four bootstrap engines.

use std::fmt;
use std::str::FromStr;

use distinf_core::{
    blb_run, db_run, pdb_run, quantile_sorted, sdb_run, BlbConfig, BlockPartition, DbConfig, Estimate, Evaluation,
    Interval, Kernel, PdbConfig, PdbMode, ScaleConvention, SdbConfig, SeedSpec, SubsetSelection, Table, TimeBudget,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "DB")]
    Db,
    #[serde(rename = "PDB")]
    Pdb,
    #[serde(rename = "BLB")]
    Blb,
    #[serde(rename = "SDB")]
    Sdb,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Db, Method::Pdb, Method::Blb, Method::Sdb];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Db => "DB",
            Method::Pdb => "PDB",
            Method::Blb => "BLB",
            Method::Sdb => "SDB",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            Method::Db => 0xD8,
            Method::Pdb => 0x9D8,
            Method::Blb => 0xB18,
            Method::Sdb => 0x5D8,
        }
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "db" => Ok(Method::Db),
            "pdb" => Ok(Method::Pdb),
            "blb" => Ok(Method::Blb),
            "sdb" => Ok(Method::Sdb),
            other => Err(HarnessError::Usage(format!("unknown method '{other}' (db, pdb, blb, sdb)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Tuning shared by the engines. Under a time budget the counts are upper
/// limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineSettings {
    /// Replicates for DB and PDB, subsets for SDB.
    pub b: usize,
    /// Inflated resamples per BLB subset.
    pub blb_b: usize,
    /// BLB subsets; `None` uses every block of the subset partition.
    pub blb_subsets: Option<usize>,
    /// BLB/SDB subset size; `None` uses `N / K`.
    pub subset_size: Option<usize>,
    /// Blocks each inflated resample is split into; `None` uses `K`.
    pub inflated_blocks: Option<usize>,
    pub pdb_mode: PdbMode,
    pub exhaustive: bool,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            b: 200,
            blb_b: 100,
            blb_subsets: None,
            subset_size: None,
            inflated_blocks: None,
            pdb_mode: PdbMode::Nondegenerate,
            exhaustive: false,
        }
    }
}

impl EngineSettings {
    pub fn eval(&self) -> Evaluation {
        if self.exhaustive {
            Evaluation::Exhaustive
        } else {
            Evaluation::Auto
        }
    }
}

/// Outcome of one engine run: the interval plus the width of the interval
/// that would have been reported after each completed iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineRun {
    pub method: Method,
    pub n: usize,
    pub k: usize,
    pub point: f64,
    pub interval: Interval,
    pub scale_convention: ScaleConvention,
    pub requested: usize,
    pub completed: usize,
    pub budgeted: bool,
    /// Seconds at which each iteration completed (budgeted runs only).
    pub timestamps: Option<Vec<f64>>,
    /// `(iterations completed, interval width)` at checkpoints.
    pub width_path: Vec<(usize, f64)>,
}

/// Maximum number of checkpoints in [`EngineRun::width_path`].
pub const MAX_CHECKPOINTS: usize = 256;

/// Runs `method` on `table` split by `partition`, with `estimate` the
/// distributed statistic on that split.
#[allow(clippy::too_many_arguments)]
pub fn run_engine(
    method: Method,
    table: &Table,
    partition: &BlockPartition,
    estimate: &Estimate,
    kernel: &dyn Kernel<f64>,
    settings: &EngineSettings,
    budget: Option<TimeBudget>,
    seed: &SeedSpec,
    level: f64,
) -> Result<EngineRun> {
    let (n, k) = (table.nrows(), partition.k());
    let point = estimate.aggregate;
    let seed = seed.child(method.tag());
    let eval = settings.eval();
    let subset_size = settings.subset_size.unwrap_or((n / k).max(2));
    let inflated_blocks = settings.inflated_blocks.unwrap_or(k);
    let tau = 1.0 - level;

    let boot = match method {
        Method::Db => db_run(table, partition, kernel, &DbConfig { b: settings.b, seed, budget, eval })?,
        Method::Pdb => pdb_run(estimate, &PdbConfig { b: settings.b, mode: settings.pdb_mode, seed, budget })?,
        Method::Sdb => sdb_run(
            table,
            kernel,
            &SdbConfig { subset_size, subsets: settings.b, inflated_blocks, seed, budget, eval },
        )?,
        Method::Blb => {
            let groups = n / subset_size;
            let cfg = BlbConfig {
                subset_size,
                subsets: settings.blb_subsets.unwrap_or(groups).min(groups),
                b: settings.blb_b,
                inflated_blocks,
                selection: SubsetSelection::Disjoint,
                seed,
                budget,
                eval,
            };
            let res = blb_run(table, kernel, &cfg)?;
            let interval = res.interval(point, level)?;
            let root_n = (n as f64).sqrt();
            let mut widths = Vec::with_capacity(res.completed);
            let mut acc = 0.0;
            for (s, u) in res.subset_replicates.iter().enumerate() {
                let mut sorted = u.clone();
                sorted.sort_by(f64::total_cmp);
                let w = (quantile_sorted(&sorted, 1.0 - tau / 2.0)? - quantile_sorted(&sorted, tau / 2.0)?) / root_n;
                acc += w;
                widths.push((s + 1, acc / (s + 1) as f64));
            }
            return Ok(EngineRun {
                method,
                n,
                k,
                point,
                interval,
                scale_convention: ScaleConvention::SqrtN,
                requested: res.requested,
                completed: res.completed,
                budgeted: res.budgeted,
                timestamps: res.timestamps,
                width_path: thin(widths),
            });
        }
    };
    let interval = boot.ci_equal_tail(point, level)?;
    let divisor = boot.scale_convention.divisor(boot.n, boot.k);
    let width_path = checkpoints(boot.b())
        .into_iter()
        .map(|m| {
            let mut prefix = boot.replicates[..m].to_vec();
            prefix.sort_by(f64::total_cmp);
            let w = (quantile_sorted(&prefix, 1.0 - tau / 2.0)? - quantile_sorted(&prefix, tau / 2.0)?) / divisor;
            Ok((m, w))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EngineRun {
        method,
        n,
        k,
        point,
        interval,
        scale_convention: boot.scale_convention,
        requested: boot.requested,
        completed: boot.completed,
        budgeted: boot.budgeted,
        timestamps: boot.timestamps,
        width_path,
    })
}

/// Iteration counts `2..=b` at which prefix widths are evaluated: every
/// count up to the checkpoint limit, geometric spacing beyond it.
fn checkpoints(b: usize) -> Vec<usize> {
    if b < 2 {
        return Vec::new();
    }
    if b - 1 <= MAX_CHECKPOINTS {
        return (2..=b).collect();
    }
    let ratio = (b as f64 / 2.0).powf(1.0 / (MAX_CHECKPOINTS - 1) as f64);
    let mut out: Vec<usize> = (0..MAX_CHECKPOINTS).map(|i| (2.0 * ratio.powi(i as i32)).round() as usize).collect();
    out.push(b);
    out.dedup();
    out.retain(|&m| (2..=b).contains(&m));
    out
}

fn thin(path: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    if path.len() <= MAX_CHECKPOINTS {
        return path;
    }
    let keep = checkpoints(path.len() + 1);
    keep.into_iter().map(|m| path[m - 2]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use distinf_core::{distributed_u_stat_with, gini_kernel, partition_random};

    use crate::scenario::Univariate;

    fn setup(n: usize, k: usize) -> (Table, BlockPartition, Estimate) {
        let t = Univariate::GAUSSIAN.table(&SeedSpec::new(1), 0, n).unwrap();
        let p = partition_random(&t, k, &SeedSpec::new(2)).unwrap();
        let e = distributed_u_stat_with(&t, &p, &gini_kernel(), Evaluation::Auto).unwrap();
        (t, p, e)
    }

    #[test]
    fn checkpoints_are_increasing_and_end_at_b() {
        assert!(checkpoints(1).is_empty());
        assert_eq!(checkpoints(5), vec![2, 3, 4, 5]);
        let c = checkpoints(100_000);
        assert!(c.len() <= MAX_CHECKPOINTS + 1);
        assert_eq!(*c.last().unwrap(), 100_000);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn every_engine_returns_an_interval_around_the_point() {
        let (t, p, e) = setup(2000, 20);
        let settings = EngineSettings { b: 100, blb_b: 50, blb_subsets: Some(4), ..Default::default() };
        for m in Method::ALL {
            let r = run_engine(m, &t, &p, &e, &gini_kernel(), &settings, None, &SeedSpec::new(3), 0.95).unwrap();
            assert!(r.interval.lower < r.point && r.point < r.interval.upper, "{m}: {r:?}");
            let (last_m, last_w) = *r.width_path.last().unwrap();
            assert_eq!(last_m, r.completed);
            if m != Method::Blb {
                assert!((last_w - r.interval.width()).abs() < 1e-12, "{m}");
            }
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let (t, p, e) = setup(500, 10);
        let s = EngineSettings { b: 30, ..Default::default() };
        let a = run_engine(Method::Db, &t, &p, &e, &gini_kernel(), &s, None, &SeedSpec::new(9), 0.9).unwrap();
        let b = run_engine(Method::Db, &t, &p, &e, &gini_kernel(), &s, None, &SeedSpec::new(9), 0.9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!("jackknife".parse::<Method>().is_err());
    }
}
