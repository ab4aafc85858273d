//! Simulation suites: interval coverage, MSE inflation, time evolution of
//! width errors, and independence-test size and power.

use distinf_core::{
    dcov_distributed, distributed_jackknife_variance_with, distributed_u_stat_with, gini_kernel,
    jackknife_u_variance, partition_random, partition_random_n, quantile_sorted, test_block_var, test_var, Error,
    Evaluation, SeedSpec, TimeBudget,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{run_engine, EngineRun, EngineSettings, Method};
use crate::error::{HarnessError, Result};
use crate::report::{CoverageRecord, DcovRecord, MseRecord, TimeRecord};
use crate::scenario::{DcovFamily, DcovScenario, Univariate};
use crate::truth::{gini_truth, GiniTruth};

const PARTITION_TAG: u64 = 0x9A27;
const ENGINE_TAG: u64 = 0xE9E;

fn check_positive(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(HarnessError::Config(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

fn check_ks(ks: &[usize], n: usize, min_block: usize) -> Result<()> {
    if ks.is_empty() {
        return Err(HarnessError::Config("K grid is empty".into()));
    }
    for &k in ks {
        if k == 0 || n / k < min_block {
            return Err(HarnessError::Config(format!("K = {k} leaves blocks smaller than {min_block} at N = {n}")));
        }
    }
    Ok(())
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("level must lie in (0, 1), got {level}")))
    }
}

fn budget_of(seconds: Option<f64>) -> Result<Option<TimeBudget>> {
    seconds.map(TimeBudget::new).transpose().map_err(HarnessError::from)
}

/// Per-replication seeds for partitions and engines.
fn rep_seeds(seed: &SeedSpec, rep: usize, k: usize) -> (SeedSpec, SeedSpec) {
    let base = seed.child(rep as u64).child(k as u64);
    (base.child(PARTITION_TAG), base.child(ENGINE_TAG))
}

/// Maps `f` over `0..reps`, in parallel unless the work is timed.
fn over_reps<R: Send, F>(reps: usize, sequential: bool, f: F) -> Result<Vec<R>>
where
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    if sequential {
        (0..reps).map(f).collect()
    } else {
        (0..reps).into_par_iter().map(f).collect()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (c > 0).then(|| s / c as f64)
}

/// Whether an engine failure is an empty result to be recorded as NA.
fn is_empty_result(e: &HarnessError) -> bool {
    matches!(
        e,
        HarnessError::Core(Error::EmptyResult { .. } | Error::InsufficientReplicates { .. })
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoverageConfig {
    pub scenario: Univariate,
    pub n: usize,
    pub ks: Vec<usize>,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub level: f64,
    pub budget_seconds: Option<f64>,
    pub engine: EngineSettings,
    pub seed: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            scenario: Univariate::GAUSSIAN,
            n: 10_000,
            ks: vec![100],
            reps: 500,
            methods: Method::ALL.to_vec(),
            level: 0.95,
            budget_seconds: None,
            engine: EngineSettings::default(),
            seed: 1,
        }
    }
}

impl CoverageConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        check_positive("reps", self.reps)?;
        check_level(self.level)?;
        check_ks(&self.ks, self.n, 2)?;
        if self.methods.is_empty() {
            return Err(HarnessError::Config("no methods selected".into()));
        }
        budget_of(self.budget_seconds)?;
        Ok(())
    }
}

/// Coverage and mean width of equal-tail intervals for `theta`, one record
/// per `(method, K)`. Engine runs that complete nothing are counted as NA.
pub fn simulate_coverage(cfg: &CoverageConfig) -> Result<Vec<CoverageRecord>> {
    cfg.validate()?;
    let truth = gini_truth(&cfg.scenario)?;
    let seed = SeedSpec::new(cfg.seed);
    let budget = budget_of(cfg.budget_seconds)?;
    let kernel = gini_kernel();
    let eval = cfg.engine.eval();

    // outcome[rep][k][method] = Some((hit, width, completed)) or None for NA
    let outcomes = over_reps(cfg.reps, budget.is_some(), |rep| {
        let table = cfg.scenario.table(&seed, rep, cfg.n)?;
        cfg.ks
            .iter()
            .map(|&k| {
                let (pseed, eseed) = rep_seeds(&seed, rep, k);
                let part = partition_random(&table, k, &pseed)?;
                let est = distributed_u_stat_with(&table, &part, &kernel, eval)?;
                cfg.methods
                    .iter()
                    .map(|&m| {
                        match run_engine(m, &table, &part, &est, &kernel, &cfg.engine, budget, &eseed, cfg.level) {
                            Ok(r) => Ok(Some((r.interval.contains(truth.theta), r.interval.width(), r.completed))),
                            Err(e) if is_empty_result(&e) => Ok(None),
                            Err(e) => Err(e),
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::new();
    for (ki, &k) in cfg.ks.iter().enumerate() {
        for (mi, &m) in cfg.methods.iter().enumerate() {
            let cells: Vec<_> = outcomes.iter().map(|o| o[ki][mi]).collect();
            let valid: Vec<_> = cells.iter().flatten().collect();
            records.push(CoverageRecord {
                scenario: cfg.scenario.label().to_string(),
                method: m.label().to_string(),
                n: cfg.n,
                k,
                reps: cfg.reps,
                valid: valid.len(),
                na: cells.len() - valid.len(),
                coverage: mean(valid.iter().map(|c| f64::from(u8::from(c.0)))),
                mean_width: mean(valid.iter().map(|c| c.1)),
                mean_completed: mean(valid.iter().map(|c| c.2 as f64)).unwrap_or(0.0),
                theta: truth.theta,
            });
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MseConfig {
    pub scenario: Univariate,
    pub n: usize,
    pub ks: Vec<usize>,
    pub reps: usize,
    pub exhaustive: bool,
    pub seed: u64,
}

impl Default for MseConfig {
    fn default() -> Self {
        Self {
            scenario: Univariate::GAUSSIAN,
            n: 10_000,
            ks: vec![1, 10, 50, 100],
            reps: 1000,
            exhaustive: false,
            seed: 1,
        }
    }
}

impl MseConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        check_positive("reps", self.reps)?;
        check_ks(&self.ks, self.n, 3)
    }
}

struct MseDraw {
    u_full: f64,
    v_full: f64,
    per_k: Vec<(f64, f64, f64)>,
}

/// Monte Carlo MSE of `U_{N,K}` for `theta` and of the distributed
/// jackknife for `Var(U_{N,K})`, each relative to the full-sample
/// statistic and jackknife on the same data.
pub fn simulate_mse_ratio(cfg: &MseConfig) -> Result<Vec<MseRecord>> {
    cfg.validate()?;
    let truth = gini_truth(&cfg.scenario)?;
    let seed = SeedSpec::new(cfg.seed);
    let kernel = gini_kernel();
    let eval = if cfg.exhaustive { Evaluation::Exhaustive } else { Evaluation::Auto };
    let var_full = truth.var_u(cfg.n);

    let draws = over_reps(cfg.reps, false, |rep| {
        let table = cfg.scenario.table(&seed, rep, cfg.n)?;
        let full = distributed_u_stat_with(&table, &partition_random_n(cfg.n, 1, &seed)?, &kernel, eval)?.aggregate;
        let jk = jackknife_u_variance(table.view(), &kernel, eval)?;
        let per_k = cfg
            .ks
            .iter()
            .map(|&k| {
                let (pseed, _) = rep_seeds(&seed, rep, k);
                let part = partition_random(&table, k, &pseed)?;
                let u = distributed_u_stat_with(&table, &part, &kernel, eval)?.aggregate;
                let v = distributed_jackknife_variance_with(&table, &part, &kernel, eval)?.value;
                Ok((u, v, truth.var_distributed(part.sizes())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MseDraw { u_full: full, v_full: jk.var_hat, per_k })
    })?;

    let r = cfg.reps as f64;
    let mse = |xs: &mut dyn Iterator<Item = (f64, f64)>| xs.map(|(x, t)| (x - t).powi(2)).sum::<f64>() / r;
    let moments = |xs: &[f64], target: f64| {
        let m = xs.iter().sum::<f64>() / r;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / r;
        (m - target, v)
    };
    let mse_u_full = mse(&mut draws.iter().map(|d| (d.u_full, truth.theta)));
    let mse_var_full = mse(&mut draws.iter().map(|d| (d.v_full, var_full)));
    let v_full: Vec<f64> = draws.iter().map(|d| d.v_full).collect();
    let (bias_full, var_var_full) = moments(&v_full, var_full);

    Ok(cfg
        .ks
        .iter()
        .enumerate()
        .map(|(ki, &k)| {
            let mse_u = mse(&mut draws.iter().map(|d| (d.per_k[ki].0, truth.theta)));
            let mse_var = mse(&mut draws.iter().map(|d| (d.per_k[ki].1, d.per_k[ki].2)));
            let target = draws[0].per_k[ki].2;
            let v: Vec<f64> = draws.iter().map(|d| d.per_k[ki].1).collect();
            let (bias, var_var) = moments(&v, target);
            MseRecord {
                scenario: cfg.scenario.label().to_string(),
                n: cfg.n,
                k,
                reps: cfg.reps,
                mse_u,
                mse_u_full,
                ratio_u: mse_u / mse_u_full,
                mse_var,
                mse_var_full,
                ratio_var: mse_var / mse_var_full,
                bias_var: bias,
                bias_var_full: bias_full,
                ratio_abs_bias_var: bias.abs() / bias_full.abs(),
                var_var,
                var_var_full,
                ratio_var_var: var_var / var_var_full,
            }
        })
        .collect())
}

/// Source of the true interval width `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WidthOracle {
    /// Quantile spread of `U_{N,K}` over independent simulated datasets.
    MonteCarlo { reps: usize },
    /// `2 z_{1 - tau/2} sd(U_{N,K})` from the exact variance.
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimeConfig {
    pub scenario: Univariate,
    pub n: usize,
    pub ks: Vec<usize>,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub level: f64,
    pub budget_seconds: f64,
    pub ticks: usize,
    pub oracle: WidthOracle,
    pub engine: EngineSettings,
    pub seed: u64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            scenario: Univariate::GAUSSIAN,
            n: 10_000,
            ks: vec![20, 100],
            reps: 20,
            methods: Method::ALL.to_vec(),
            level: 0.95,
            budget_seconds: 2.0,
            ticks: 40,
            oracle: WidthOracle::MonteCarlo { reps: 5000 },
            engine: EngineSettings { b: 1_000_000, ..EngineSettings::default() },
            seed: 1,
        }
    }
}

impl TimeConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        check_positive("reps", self.reps)?;
        check_positive("ticks", self.ticks)?;
        check_level(self.level)?;
        check_ks(&self.ks, self.n, 2)?;
        if let WidthOracle::MonteCarlo { reps } = self.oracle {
            if reps < 2 {
                return Err(HarnessError::Config("width oracle needs at least 2 replications".into()));
            }
        }
        TimeBudget::new(self.budget_seconds)?;
        Ok(())
    }

    /// Tick times `budget * j / ticks`, `j = 1..=ticks`.
    pub fn grid(&self) -> Vec<f64> {
        (1..=self.ticks).map(|j| self.budget_seconds * j as f64 / self.ticks as f64).collect()
    }
}

/// True width `d` of the `level` interval for `U_{N,K}`.
pub fn true_width(
    dist: &Univariate,
    truth: &GiniTruth,
    n: usize,
    k: usize,
    level: f64,
    oracle: WidthOracle,
    seed: &SeedSpec,
) -> Result<f64> {
    let tau = 1.0 - level;
    match oracle {
        WidthOracle::Normal => {
            let sizes: Vec<usize> = (0..k).map(|j| n / k + usize::from(j < n % k)).collect();
            let z = statrs::distribution::ContinuousCDF::inverse_cdf(
                &statrs::distribution::Normal::standard(),
                1.0 - tau / 2.0,
            );
            Ok(2.0 * z * truth.var_distributed(&sizes).sqrt())
        }
        WidthOracle::MonteCarlo { reps } => {
            let oseed = seed.child(0x0AC1E);
            let kernel = gini_kernel();
            let mut u = over_reps(reps, false, |r| {
                let t = dist.table(&oseed, r, n)?;
                let p = partition_random(&t, k, &oseed.child(r as u64))?;
                Ok(distributed_u_stat_with(&t, &p, &kernel, Evaluation::Auto)?.aggregate)
            })?;
            u.sort_by(f64::total_cmp);
            Ok(quantile_sorted(&u, 1.0 - tau / 2.0)? - quantile_sorted(&u, tau / 2.0)?)
        }
    }
}

/// Relative width error `|w - d| / d` at each tick of `grid`, from
/// `(completion time, width)` points sorted by time. The error is 1 until
/// the first point.
pub fn relative_error_curve(path: &[(f64, f64)], d: f64, grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut i = 0;
    let mut current = 1.0;
    for &t in grid {
        while i < path.len() && path[i].0 <= t {
            current = (path[i].1 - d).abs() / d;
            i += 1;
        }
        out.push(current);
    }
    out
}

/// `(completion time, width)` points of a budgeted engine run.
pub fn timed_widths(run: &EngineRun) -> Vec<(f64, f64)> {
    match &run.timestamps {
        Some(ts) => run.width_path.iter().map(|&(m, w)| (ts[m - 1], w)).collect(),
        None => run.width_path.iter().map(|&(_, w)| (0.0, w)).collect(),
    }
}

/// Mean relative width error over time for each `(method, K)`.
pub fn simulate_time_evolution(cfg: &TimeConfig) -> Result<Vec<TimeRecord>> {
    cfg.validate()?;
    let truth = gini_truth(&cfg.scenario)?;
    let seed = SeedSpec::new(cfg.seed);
    let budget = Some(TimeBudget::new(cfg.budget_seconds)?);
    let kernel = gini_kernel();
    let eval = cfg.engine.eval();
    let grid = cfg.grid();

    let mut records = Vec::new();
    for &k in &cfg.ks {
        let d = true_width(&cfg.scenario, &truth, cfg.n, k, cfg.level, cfg.oracle, &seed)?;
        // curves[method][rep][tick]
        let mut curves = vec![Vec::with_capacity(cfg.reps); cfg.methods.len()];
        for rep in 0..cfg.reps {
            let table = cfg.scenario.table(&seed, rep, cfg.n)?;
            let (pseed, eseed) = rep_seeds(&seed, rep, k);
            let part = partition_random(&table, k, &pseed)?;
            let est = distributed_u_stat_with(&table, &part, &kernel, eval)?;
            for (mi, &m) in cfg.methods.iter().enumerate() {
                let path = match run_engine(m, &table, &part, &est, &kernel, &cfg.engine, budget, &eseed, cfg.level) {
                    Ok(r) => timed_widths(&r),
                    Err(e) if is_empty_result(&e) => Vec::new(),
                    Err(e) => return Err(e),
                };
                curves[mi].push(relative_error_curve(&path, d, &grid));
            }
        }
        for (mi, &m) in cfg.methods.iter().enumerate() {
            for (j, &t) in grid.iter().enumerate() {
                records.push(TimeRecord {
                    scenario: cfg.scenario.label().to_string(),
                    method: m.label().to_string(),
                    k,
                    t,
                    mean_rel_error: curves[mi].iter().map(|c| c[j]).sum::<f64>() / cfg.reps as f64,
                    reps: cfg.reps,
                    true_width: d,
                });
            }
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DcovConfig {
    pub family: DcovFamily,
    pub ps: Vec<usize>,
    pub ks: Vec<usize>,
    /// Cross-correlation; 0 simulates the null.
    pub rho: f64,
    pub n: usize,
    pub reps: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for DcovConfig {
    fn default() -> Self {
        Self {
            family: DcovFamily::I,
            ps: vec![5],
            ks: vec![20, 100],
            rho: 0.0,
            n: 10_000,
            reps: 500,
            level: 0.05,
            seed: 1,
        }
    }
}

impl DcovConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("reps", self.reps)?;
        check_level(self.level)?;
        check_ks(&self.ks, self.n, 4)?;
        if self.ps.is_empty() || self.ps.contains(&0) {
            return Err(HarnessError::Config("dimension grid must hold positive values".into()));
        }
        for &p in &self.ps {
            DcovScenario::new(self.family, p, self.rho)?;
        }
        Ok(())
    }
}

/// Empirical rejection rates of the variance-based and block-variance
/// tests over the `(p, K)` grid. A test whose variance estimate is not
/// positive in a replication is excluded from that cell.
pub fn simulate_dcov(cfg: &DcovConfig) -> Result<Vec<DcovRecord>> {
    cfg.validate()?;
    let seed = SeedSpec::new(cfg.seed);
    let mut records = Vec::new();
    for &p in &cfg.ps {
        let scenario = DcovScenario::new(cfg.family, p, cfg.rho)?;
        let pseed = seed.child(p as u64);
        // outcome[rep][k] = (var test, block test), None when undefined
        let outcomes = over_reps(cfg.reps, false, |rep| {
            let pair = scenario.pair(&pseed, rep, cfg.n)?;
            cfg.ks
                .iter()
                .map(|&k| {
                    let (part_seed, _) = rep_seeds(&pseed, rep, k);
                    let part = partition_random_n(cfg.n, k, &part_seed)?;
                    let summary = dcov_distributed(&pair, &part)?;
                    let flag = |r: distinf_core::Result<distinf_core::TestReport>| match r {
                        Ok(t) => Ok(Some(t.reject)),
                        Err(Error::InvalidVariance { .. }) => Ok(None),
                        Err(e) => Err(HarnessError::from(e)),
                    };
                    Ok((flag(test_var(&summary, cfg.level))?, flag(test_block_var(&summary, cfg.level))?))
                })
                .collect::<Result<Vec<_>>>()
        })?;
        for (ki, &k) in cfg.ks.iter().enumerate() {
            for (name, pick) in [("T_var", 0usize), ("T_block", 1)] {
                let cells: Vec<Option<bool>> =
                    outcomes.iter().map(|o| if pick == 0 { o[ki].0 } else { o[ki].1 }).collect();
                let valid = cells.iter().flatten().count();
                let rejections = cells.iter().flatten().filter(|&&r| r).count();
                records.push(DcovRecord {
                    scenario: cfg.family.to_string(),
                    test: name.to_string(),
                    p,
                    n: cfg.n,
                    k,
                    rho: cfg.rho,
                    reps: cfg.reps,
                    valid,
                    rejections,
                    rate: (valid > 0).then(|| rejections as f64 / valid as f64),
                });
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_instant_engine_drops_at_first_tick() {
        let grid = [0.5, 1.0, 1.5];
        let curve = relative_error_curve(&[(0.0, 2.0), (0.0, 1.1)], 1.0, &grid);
        assert!((curve[0] - 0.1).abs() < 1e-12);
        assert_eq!(relative_error_curve(&[], 1.0, &grid), vec![1.0; 3]);
        let late = relative_error_curve(&[(1.2, 1.0)], 1.0, &grid);
        assert_eq!(late, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn mse_ratio_is_one_at_k1() {
        let cfg = MseConfig { n: 300, ks: vec![1, 5], reps: 20, ..Default::default() };
        let recs = simulate_mse_ratio(&cfg).unwrap();
        assert_eq!(recs[0].ratio_u, 1.0);
        assert_eq!(recs[0].ratio_var, 1.0);
        assert!(recs[1].ratio_u > 0.0);
    }

    #[test]
    fn degenerate_budget_gives_all_na() {
        let cfg = CoverageConfig {
            n: 2000,
            ks: vec![10],
            reps: 3,
            methods: vec![Method::Db, Method::Blb],
            budget_seconds: Some(1e-9),
            ..Default::default()
        };
        for r in simulate_coverage(&cfg).unwrap() {
            assert_eq!((r.valid, r.na), (0, 3));
            assert_eq!(r.coverage, None);
            assert_eq!(r.mean_completed, 0.0);
        }
    }

    #[test]
    fn coverage_is_reproducible_and_bounded() {
        let cfg = CoverageConfig {
            n: 1000,
            ks: vec![10],
            reps: 8,
            engine: EngineSettings { b: 50, blb_b: 20, blb_subsets: Some(3), ..Default::default() },
            ..Default::default()
        };
        let a = simulate_coverage(&cfg).unwrap();
        assert_eq!(a, simulate_coverage(&cfg).unwrap());
        assert_eq!(a.len(), 4);
        for r in &a {
            let c = r.coverage.unwrap();
            assert!((0.0..=1.0).contains(&c));
            assert!(r.mean_width.unwrap() >= 0.0);
        }
    }

    #[test]
    fn oracles_agree() {
        let t = gini_truth(&Univariate::GAUSSIAN).unwrap();
        let s = SeedSpec::new(8);
        let normal = true_width(&Univariate::GAUSSIAN, &t, 2000, 10, 0.95, WidthOracle::Normal, &s).unwrap();
        let mc = true_width(&Univariate::GAUSSIAN, &t, 2000, 10, 0.95, WidthOracle::MonteCarlo { reps: 2000 }, &s)
            .unwrap();
        assert!((mc / normal - 1.0).abs() < 0.08, "{mc} vs {normal}");
    }

    #[test]
    fn time_curves_start_at_one() {
        let cfg = TimeConfig {
            n: 1000,
            ks: vec![10],
            reps: 2,
            budget_seconds: 0.2,
            ticks: 4,
            oracle: WidthOracle::Normal,
            methods: vec![Method::Pdb, Method::Db],
            ..Default::default()
        };
        let recs = simulate_time_evolution(&cfg).unwrap();
        assert_eq!(recs.len(), 8);
        for r in &recs {
            assert!(r.mean_rel_error.is_finite() && r.mean_rel_error >= 0.0);
        }
        let pdb_last = recs.iter().find(|r| r.method == "PDB" && r.t == 0.2).unwrap();
        assert!(pdb_last.mean_rel_error < 0.5, "{pdb_last:?}");
    }

    #[test]
    fn dcov_grid_shape() {
        let cfg = DcovConfig { ps: vec![2, 3], ks: vec![5], n: 400, reps: 10, ..Default::default() };
        let recs = simulate_dcov(&cfg).unwrap();
        assert_eq!(recs.len(), 4);
        for r in &recs {
            assert!(r.rate.unwrap() <= 1.0);
        }
        let strong = DcovConfig { rho: 0.5, ..cfg };
        let recs = simulate_dcov(&strong).unwrap();
        assert!(recs.iter().all(|r| r.rate.unwrap() > 0.5), "{recs:?}");
    }
}
