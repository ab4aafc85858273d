//! Harness error type and process exit codes.

use thiserror::Error;

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for data errors.
pub const EXIT_DATA: i32 = 3;
/// Exit code for infeasible plans and empty results.
pub const EXIT_EMPTY: i32 = 4;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error("parse error at data row {row}, column '{column}': {value:?}")]
    Parse { row: usize, column: String, value: String },
    #[error("no rows left after filtering ({dropped} dropped)")]
    EmptyData { dropped: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] distinf_core::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        use distinf_core::Error as E;
        match self {
            HarnessError::Usage(_) | HarnessError::Config(_) => EXIT_USAGE,
            HarnessError::Core(E::InvalidArgument(_)) => EXIT_USAGE,
            HarnessError::Core(E::Infeasible(_) | E::EmptyResult { .. }) => EXIT_EMPTY,
            _ => EXIT_DATA,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Usage("x".into()).exit_code(), 2);
        assert_eq!(HarnessError::EmptyData { dropped: 3 }.exit_code(), 3);
        assert_eq!(HarnessError::Core(distinf_core::Error::EmptyResult { completed: 0 }).exit_code(), 4);
        assert_eq!(HarnessError::Core(distinf_core::Error::Infeasible("c".into())).exit_code(), 4);
        assert_eq!(HarnessError::Core(distinf_core::Error::InvalidArgument("k".into())).exit_code(), 2);
    }
}
