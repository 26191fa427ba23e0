use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column {index} has norm below 1e-14 and cannot be normalized")]
    ZeroColumn { index: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("restricted matrix is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("enumeration of {required} supports exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("iteration budget exceeded: {requested} iterations requested, cap is {cap}")]
    IterationBudgetExceeded { requested: usize, cap: usize },

    #[error("iterate diverged at iteration {iteration}: norm {norm:e} exceeds {limit:e}")]
    Divergence {
        iteration: usize,
        norm: f64,
        limit: f64,
    },

    #[error("constant has a pole at delta = {pole}; got delta = {delta}")]
    PoleViolation { delta: f64, pole: f64 },

    #[error("constant is not computable: {0}")]
    NotComputable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable category, used by the command-line tool.
    pub fn category(&self) -> &'static str {
        match self {
            Error::ZeroColumn { .. } => "zero_column",
            Error::NonFinite { .. } => "non_finite",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Dimension(_) => "dimension",
            Error::InvalidSupport(_) => "invalid_support",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::Precondition(_) => "precondition",
            Error::IterationBudgetExceeded { .. } => "iteration_budget_exceeded",
            Error::Divergence { .. } => "divergence",
            Error::PoleViolation { .. } => "pole_violation",
            Error::NotComputable(_) => "not_computable",
            Error::Config(_) => "config",
            Error::Parse(_) => "parse",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
