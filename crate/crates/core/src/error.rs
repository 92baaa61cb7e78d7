use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {}", join(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("task list is not precedence feasible: {0}")]
    PrecedenceInfeasible(String),

    #[error("discrepancy at depth {depth} with only {remaining} job(s) left")]
    InfeasibleDecision { depth: usize, remaining: usize },

    #[error("enumeration needs {needed} task lists, above the limit of {limit}")]
    LimitExceeded { needed: String, limit: u64 },

    #[error("enumeration cancelled")]
    Cancelled,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
