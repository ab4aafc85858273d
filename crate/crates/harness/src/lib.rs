//! Simulation harness and command-line plumbing for `distinf-core`: CSV
//! ingestion, data-generating scenarios, population truth values, a common
//! front end for the bootstrap engines, experiment suites and report
//! serialization.

pub mod engine;
pub mod error;
pub mod ingest;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod truth;

pub use engine::{run_engine, EngineRun, EngineSettings, Method};
pub use error::{HarnessError, Result};
pub use scenario::{DcovFamily, DcovScenario, Univariate};
pub use sim::{
    simulate_coverage, simulate_dcov, simulate_mse_ratio, simulate_time_evolution, CoverageConfig, DcovConfig,
    MseConfig, TimeConfig, WidthOracle,
};
pub use truth::{gini_truth, GiniTruth};
