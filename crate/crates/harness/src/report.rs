//! Structured experiment records and their CSV/JSON serialization.
//!
//! Floats are written with 17 significant digits; missing values as `NA`.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// A row of a long-format CSV report with a fixed column order.
pub trait CsvRecord {
    const HEADER: &'static [&'static str];

    fn fields(&self) -> Vec<String>;
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt_f64)
}

pub fn write_csv<W: Write, R: CsvRecord>(out: W, records: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: CsvRecord>(records: &[R]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

/// JSON envelope: experiment kind, its configuration and the records.
#[derive(Debug, Clone, Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub kind: &'a str,
    pub config: &'a C,
    pub records: &'a [R],
}

pub fn write_json<W: Write, C: Serialize, R: Serialize>(out: W, kind: &str, config: &C, records: &[R]) -> Result<()> {
    serde_json::to_writer_pretty(out, &Report { kind, config, records })?;
    Ok(())
}

/// Coverage and mean width of one method at one `K` (one cell of a
/// coverage table).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRecord {
    pub scenario: String,
    pub method: String,
    pub n: usize,
    pub k: usize,
    pub reps: usize,
    /// Replications that produced an interval.
    pub valid: usize,
    /// Replications where the engine completed no usable iteration.
    pub na: usize,
    pub coverage: Option<f64>,
    pub mean_width: Option<f64>,
    pub mean_completed: f64,
    pub theta: f64,
}

impl CsvRecord for CoverageRecord {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "method",
        "n",
        "k",
        "reps",
        "valid",
        "na",
        "coverage",
        "mean_width",
        "mean_completed",
        "theta",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.method.clone(),
            self.n.to_string(),
            self.k.to_string(),
            self.reps.to_string(),
            self.valid.to_string(),
            self.na.to_string(),
            fmt_opt(self.coverage),
            fmt_opt(self.mean_width),
            fmt_f64(self.mean_completed),
            fmt_f64(self.theta),
        ]
    }
}

/// Monte Carlo MSE of the distributed statistic and its variance estimate
/// relative to the full-sample counterparts at one `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseRecord {
    pub scenario: String,
    pub n: usize,
    pub k: usize,
    pub reps: usize,
    pub mse_u: f64,
    pub mse_u_full: f64,
    pub ratio_u: f64,
    pub mse_var: f64,
    pub mse_var_full: f64,
    pub ratio_var: f64,
    pub bias_var: f64,
    pub bias_var_full: f64,
    pub ratio_abs_bias_var: f64,
    pub var_var: f64,
    pub var_var_full: f64,
    pub ratio_var_var: f64,
}

impl CsvRecord for MseRecord {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "n",
        "k",
        "reps",
        "mse_u",
        "mse_u_full",
        "ratio_u",
        "mse_var",
        "mse_var_full",
        "ratio_var",
        "bias_var",
        "bias_var_full",
        "ratio_abs_bias_var",
        "var_var",
        "var_var_full",
        "ratio_var_var",
    ];

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.scenario.clone(), self.n.to_string(), self.k.to_string(), self.reps.to_string()];
        f.extend(
            [
                self.mse_u,
                self.mse_u_full,
                self.ratio_u,
                self.mse_var,
                self.mse_var_full,
                self.ratio_var,
                self.bias_var,
                self.bias_var_full,
                self.ratio_abs_bias_var,
                self.var_var,
                self.var_var_full,
                self.ratio_var_var,
            ]
            .map(fmt_f64),
        );
        f
    }
}

/// Mean relative width error of one method at one `K` and time tick.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeRecord {
    pub scenario: String,
    pub method: String,
    pub k: usize,
    pub t: f64,
    pub mean_rel_error: f64,
    pub reps: usize,
    pub true_width: f64,
}

impl CsvRecord for TimeRecord {
    const HEADER: &'static [&'static str] = &["scenario", "method", "k", "t", "mean_rel_error", "reps", "true_width"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.method.clone(),
            self.k.to_string(),
            fmt_f64(self.t),
            fmt_f64(self.mean_rel_error),
            self.reps.to_string(),
            fmt_f64(self.true_width),
        ]
    }
}

/// Rejection rate of one test at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DcovRecord {
    pub scenario: String,
    pub test: String,
    pub p: usize,
    pub n: usize,
    pub k: usize,
    pub rho: f64,
    pub reps: usize,
    pub valid: usize,
    pub rejections: usize,
    pub rate: Option<f64>,
}

impl CsvRecord for DcovRecord {
    const HEADER: &'static [&'static str] =
        &["scenario", "test", "p", "n", "k", "rho", "reps", "valid", "rejections", "rate"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.scenario.clone(),
            self.test.clone(),
            self.p.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            fmt_f64(self.rho),
            self.reps.to_string(),
            self.valid.to_string(),
            self.rejections.to_string(),
            fmt_opt(self.rate),
        ]
    }
}

/// Completed iterations of one method at one `K` under a time budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub method: String,
    pub n: usize,
    pub k: usize,
    pub budget_seconds: f64,
    pub requested: usize,
    pub completed: usize,
    pub iterations_per_second: f64,
}

impl CsvRecord for BenchRecord {
    const HEADER: &'static [&'static str] =
        &["method", "n", "k", "budget_seconds", "requested", "completed", "iterations_per_second"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.method.clone(),
            self.n.to_string(),
            self.k.to_string(),
            fmt_f64(self.budget_seconds),
            self.requested.to_string(),
            self.completed.to_string(),
            fmt_f64(self.iterations_per_second),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_17_digits() {
        for x in [0.1, 1.0 / 3.0, 2.0 / std::f64::consts::PI.sqrt(), 1e-300, -7.25e12] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
        assert_eq!(fmt_opt(None), "NA");
    }

    fn header_line<R: CsvRecord>() -> String {
        R::HEADER.join(",")
    }

    #[test]
    fn golden_schemas() {
        assert_eq!(
            header_line::<CoverageRecord>(),
            "scenario,method,n,k,reps,valid,na,coverage,mean_width,mean_completed,theta"
        );
        assert_eq!(
            header_line::<MseRecord>(),
            "scenario,n,k,reps,mse_u,mse_u_full,ratio_u,mse_var,mse_var_full,ratio_var,bias_var,bias_var_full,\
             ratio_abs_bias_var,var_var,var_var_full,ratio_var_var"
        );
        assert_eq!(header_line::<TimeRecord>(), "scenario,method,k,t,mean_rel_error,reps,true_width");
        assert_eq!(header_line::<DcovRecord>(), "scenario,test,p,n,k,rho,reps,valid,rejections,rate");
        assert_eq!(
            header_line::<BenchRecord>(),
            "method,n,k,budget_seconds,requested,completed,iterations_per_second"
        );
    }

    #[test]
    fn csv_rows_match_header_width() {
        let r = CoverageRecord {
            scenario: "gaussian".into(),
            method: "BLB".into(),
            n: 10,
            k: 2,
            reps: 3,
            valid: 0,
            na: 3,
            coverage: None,
            mean_width: None,
            mean_completed: 0.0,
            theta: 1.0,
        };
        let s = csv_string(&[r]).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), CoverageRecord::HEADER.len());
        assert!(lines[1].contains(",NA,NA,"));
    }
}
