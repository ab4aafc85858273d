//! Wall-clock budgeted iteration.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wall-clock allowance for a bootstrap run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBudget {
    pub seconds: f64,
}

impl TimeBudget {
    pub fn new(seconds: f64) -> Result<Self> {
        if !(seconds > 0.0 && seconds.is_finite()) {
            return Err(Error::invalid(format!("budget must be a positive number of seconds, got {seconds}")));
        }
        Ok(Self { seconds })
    }
}

/// Outputs of the iterations that finished inside the budget.
#[derive(Debug, Clone)]
pub struct BudgetRun<R> {
    pub outputs: Vec<R>,
    pub completed: usize,
    /// Elapsed seconds at which each completed iteration finished
    /// (budgeted runs only).
    pub timestamps: Option<Vec<f64>>,
    pub budgeted: bool,
}

/// Runs `f(0), f(1), ...` up to `max_iters` times.
///
/// Without a budget the iterations run in parallel and the outputs come back
/// in index order. With a budget they run sequentially on the calling
/// thread; no iteration starts once the budget has elapsed, and an iteration
/// that finishes past the deadline is discarded.
pub fn run_with_budget<R, F>(max_iters: usize, budget: Option<TimeBudget>, f: F) -> Result<BudgetRun<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    if max_iters == 0 {
        return Err(Error::invalid("at least one iteration must be requested"));
    }
    let Some(budget) = budget else {
        let outputs = (0..max_iters).into_par_iter().map(&f).collect::<Result<Vec<R>>>()?;
        return Ok(BudgetRun { completed: outputs.len(), outputs, timestamps: None, budgeted: false });
    };
    let budget = TimeBudget::new(budget.seconds)?;
    let start = Instant::now();
    let mut outputs = Vec::new();
    let mut stamps = Vec::new();
    for i in 0..max_iters {
        if start.elapsed().as_secs_f64() >= budget.seconds {
            break;
        }
        let r = f(i)?;
        let t = start.elapsed().as_secs_f64();
        if t > budget.seconds {
            break;
        }
        outputs.push(r);
        stamps.push(t);
    }
    if outputs.is_empty() {
        return Err(Error::EmptyResult { completed: 0 });
    }
    Ok(BudgetRun { completed: outputs.len(), outputs, timestamps: Some(stamps), budgeted: true })
}
