use thiserror::Error;

/// Failures mapped onto the process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("dynamics error: {0}")]
    Dynamics(String),
    #[error("scan infeasible: {0}")]
    ScanInfeasible(String),
    #[error("{0}")]
    IrrationalScale(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Dynamics(_) => 3,
            CliError::ScanInfeasible(_) => 4,
            CliError::IrrationalScale(_) => 5,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
