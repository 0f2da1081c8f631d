use thiserror::Error;

use crate::limit::LimitResult;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("situation of length {len} is shorter than the gamble horizon {horizon}")]
    SituationTooShort { len: usize, horizon: usize },

    #[error("dimension mismatch: expected {expected} states, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid state space: {0}")]
    InvalidStateSpace(String),

    #[error("unknown state symbol `{0}`")]
    UnknownState(String),

    #[error("invalid mass function: {0}")]
    InvalidMassFunction(String),

    #[error("credal set has no vertices")]
    EmptyCredalSet,

    #[error("situation of length {len} lies beyond the tree depth {depth}")]
    DepthExceeded { len: usize, depth: usize },

    #[error("enumeration of {count} trees exceeds the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("sequence did not converge by horizon {}", .0.horizon_used)]
    NotConverged(Box<LimitResult>),

    #[error("trace violates the declared monotone direction at horizon {horizon}")]
    NonMonotone { horizon: usize },

    #[error("hitting target is empty or invalid: {0}")]
    EmptyTarget(String),

    #[error("non-decreasing sequence requires a uniform lower bound")]
    MissingLowerBound,

    #[error("undefined extended-real operation: {0}")]
    Undefined(&'static str),

    #[error("invalid supermartingale: {0}")]
    InvalidSupermartingale(String),

    #[error("invalid specification file: {0}")]
    Spec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
