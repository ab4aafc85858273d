//! Pseudo-distributed bootstrap: resampling the rescaled block statistics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resample::budget::{run_with_budget, TimeBudget};
use crate::resample::{BootstrapResult, Center, ScaleConvention};
use crate::scalar::{KahanSum, Scalar};
use crate::seed::SeedSpec;
use crate::symstat::ustat::DistributedEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PdbMode {
    #[default]
    Nondegenerate,
    Degenerate,
}

#[derive(Debug, Clone, Copy)]
pub struct PdbConfig {
    pub b: usize,
    pub mode: PdbMode,
    pub seed: SeedSpec,
    pub budget: Option<TimeBudget>,
}

/// Pseudo-distributed bootstrap from block statistics alone.
///
/// Block values are rescaled to `N^{-1/2} K^{1/2} n_k T_k` (nondegenerate)
/// or `n_k T_k` (degenerate); each replicate averages `K` draws with
/// replacement from the rescaled values and reports
/// `sqrt(K) (mean - c)` with `c` the mean of the rescaled values. Cost per
/// replicate is O(K).
pub fn pdb_run<T: Scalar>(estimate: &DistributedEstimate<T>, cfg: &PdbConfig) -> Result<BootstrapResult<T>> {
    let k = estimate.k();
    if k < 2 {
        return Err(Error::invalid(format!("pseudo-distributed bootstrap needs K >= 2, got {k}")));
    }
    if estimate.per_block.len() != k {
        return Err(Error::invalid("block values and sizes differ in length"));
    }
    let n = estimate.n();
    let (nf, kf) = (n as f64, k as f64);
    let (factor, center, convention) = match cfg.mode {
        PdbMode::Nondegenerate => (
            T::of((kf / nf).sqrt()),
            T::of((nf / kf).sqrt()) * estimate.aggregate,
            ScaleConvention::KSqrt,
        ),
        PdbMode::Degenerate => (T::one(), T::of(nf / kf) * estimate.aggregate, ScaleConvention::NOverSqrtK),
    };
    let scaled: Vec<T> = estimate
        .per_block
        .iter()
        .zip(&estimate.sizes)
        .map(|(&t, &nk)| factor * T::of_usize(nk) * t)
        .collect();
    let root_k = T::of(kf.sqrt());
    let kt = T::of_usize(k);

    let run = run_with_budget(cfg.b, cfg.budget, |b| {
        let mut rng = cfg.seed.stream(0, b);
        let mut acc = KahanSum::new();
        for _ in 0..k {
            acc.add(scaled[rng.random_range(0..k)]);
        }
        Ok(acc.total() / kt)
    })?;

    Ok(BootstrapResult {
        replicates: run.outputs.iter().map(|&m| root_k * (m - center)).collect(),
        raw_statistics: run.outputs,
        center: Center::Fixed(center),
        scale_convention: convention,
        n,
        k,
        requested: cfg.b,
        completed: run.completed,
        budgeted: run.budgeted,
        timestamps: run.timestamps,
    })
}
