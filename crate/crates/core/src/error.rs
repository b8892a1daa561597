use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("size mismatch: expected {expected} values, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("nonfinite nonlinearity")]
    NonfiniteNonlinearity,
    #[error("mode index {0:?} outside the retained modes")]
    InvalidMode(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForcingError {
    #[error("invalid forcing model: {0}")]
    InvalidModel(String),
    #[error("forcing profile does not match the domain: {0}")]
    Profile(#[from] SpectralError),
}

#[derive(Debug, Error)]
pub enum DynamicsError<T: Scalar> {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step diverged at t = {t}")]
    Diverged { t: T, partial: Box<Trajectory<T>> },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("bounded-orbit iteration did not converge: {0}")]
    NoConvergence(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("integration failed: {0}")]
    Integration(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("coercivity lost: b_tilde = {0} must lie in (0, 2)")]
    CoercivityLost(f64),
    #[error("invalid constant: {0}")]
    Invalid(String),
}

/// Failure of a multi-run study, split along the CLI exit codes.
#[derive(Debug, Error)]
pub enum ExperimentError<T: Scalar> {
    #[error("precondition gate: {0}")]
    Gate(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError<T>),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}
