use thiserror::Error;

use crate::ode::OdeError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside chart domain: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("backend mismatch: expected {expected}, found {found}")]
    BackendMismatch { expected: String, found: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("representation error: {0}")]
    Representation(String),
    #[error("magnetic curvature is not negative: {0}")]
    NotNegative(String),
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("Newton iteration failed for {label}: best residual {residual:.3e} after {iterations} iterations")]
    NewtonDivergence {
        label: String,
        residual: f64,
        iterations: usize,
        best: Vec<f64>,
    },
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("continuation lost at s = {s}: {reason}")]
    ContinuationLost { s: f64, reason: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
