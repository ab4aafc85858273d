use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("insufficient sample in {context}: need at least {needed} observations, got {got}")]
    InsufficientSample { context: String, needed: usize, got: usize },

    #[error("insufficient replicates: need at least {needed}, got {got}")]
    InsufficientReplicates { needed: usize, got: usize },

    #[error("time budget exhausted with {completed} completed iterations")]
    EmptyResult { completed: usize },

    #[error("variance estimate {value} is not positive; statistic undefined")]
    InvalidVariance { value: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn short_block(block: usize, needed: usize, got: usize) -> Self {
        Error::InsufficientSample { context: format!("block {block}"), needed, got }
    }
}
