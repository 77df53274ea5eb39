use thiserror::Error;

use crate::conic::SolverStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// The first convex subproblem admits no point meeting the TU secrecy
    /// thresholds.
    #[error("secrecy thresholds infeasible at the initial linearization ({0:?})")]
    InfeasibleQ(SolverStatus),

    #[error("conic subproblem did not reach optimality ({0:?})")]
    SolverFailure(SolverStatus),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn invalid_input(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
