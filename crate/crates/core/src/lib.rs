//! Split-and-conquer inference for U-statistics: block-distributed
//! estimators, jackknife and projection variance estimates, four bootstrap
//! engines, distance-covariance independence tests and a K planner.
//!
//! Estimators are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod data;
pub mod dcov;
pub mod error;
pub mod planner;
pub mod resample;
pub mod scalar;
pub mod seed;
pub mod symstat;
pub mod variance;

pub use data::{
    check_balance, partition_predefined, partition_random, partition_random_n, BalanceReport,
    BlockPartition, DataTable, RowsView, DEFAULT_C1, DEFAULT_C2,
};
pub use dcov::{
    block_variance, dcov_distributed, dcov_triple_rows, dcov_unbiased, dcov_unbiased_rows,
    dependence_measure, sigma_beta_hat, test_block_var, test_var, DcovBlockSummary, PairSample,
    TestMethod, TestReport,
};
pub use error::{Error, Result};
pub use planner::{max_k_same_leading_mse, predicted_cost, select_k, CostModel, DEFAULT_EPSILON};
pub use resample::{
    blb_estimate, blb_run, bootstrap_sample_variance, ci_equal_tail, db_run, multinomial_uniform,
    pdb_run, quantile_sorted, run_with_budget, sdb_run, BlbConfig, BlbResult, BootstrapResult,
    BudgetRun, Center, ConfidenceInterval, DbConfig, PdbConfig, PdbMode, ScaleConvention, SdbConfig,
    SubsetSelection, TimeBudget, Xi,
};
pub use scalar::{binomial, kahan_sum, KahanSum, Scalar};
pub use seed::{derive_stream, SeedSpec, Stream};
pub use symstat::*;
pub use variance::{
    distributed_jackknife_variance, distributed_jackknife_variance_with, jackknife_gini_variance,
    jackknife_u_variance, population_variance, sigma_alpha_hat, Jackknife, VarianceEstimate,
    VarianceMethod,
};

pub type Table = DataTable<f64>;
pub type Estimate = DistributedEstimate<f64>;
pub type Pair = PairSample<f64>;
pub type DcovSummary = DcovBlockSummary<f64>;
pub type Bootstrap = BootstrapResult<f64>;
pub type Interval = ConfidenceInterval<f64>;
