use msh_core::{AnalysisError, DynamicsError, ExperimentError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("precondition gate: {0}")]
    Gate(String),
    #[error("diverged: {0}")]
    Diverged(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Gate(_) => 3,
            CliError::Diverged(_) => 4,
            CliError::Internal(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Gate(_) => "gate",
            CliError::Diverged(_) => "diverged",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            exit_code: self.exit_code(),
            kind: self.kind(),
            message: self.to_string(),
        }
    }
}

/// Machine-readable failure, written as `error.json` and to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub exit_code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("io: {e}"))
    }
}

impl From<DynamicsError<f64>> for CliError {
    fn from(e: DynamicsError<f64>) -> Self {
        match e {
            DynamicsError::Config(m) => CliError::Config(m),
            DynamicsError::Diverged { t, .. } => CliError::Diverged(format!("step diverged at t = {t}")),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Precondition(m) => CliError::Gate(m),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<ExperimentError<f64>> for CliError {
    fn from(e: ExperimentError<f64>) -> Self {
        match e {
            ExperimentError::Gate(m) => CliError::Gate(m),
            ExperimentError::Dynamics(d) => d.into(),
            ExperimentError::Analysis(a) => a.into(),
        }
    }
}
