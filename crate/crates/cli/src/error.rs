use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },

    /// Input decoded fine but is not a sample format we process.
    #[error("{path}: unsupported encoding ({detail})")]
    Encoding { path: PathBuf, detail: String },

    #[error(transparent)]
    Analysis(#[from] windpr::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Encoding { .. } => 4,
            CliError::Analysis(e) => analysis_code(e),
        }
    }
}

fn analysis_code(e: &windpr::Error) -> i32 {
    use windpr::Error::*;
    match e {
        Parameter { .. } | Config(_) => 2,
        Undefined(_) | Contract(_) | Evaluation(_) => 4,
        Trial { source, .. } => analysis_code(source),
    }
}

pub type CliResult<T> = Result<T, CliError>;
