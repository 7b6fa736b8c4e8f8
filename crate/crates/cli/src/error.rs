use thiserror::Error;

/// CLI-level errors, each mapping onto the exit-code contract:
/// 0 converged, 2 iteration-capped, 3 invalid configuration, 1 I/O or
/// parse failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 1,
            CliError::Config(_) => 3,
        }
    }
}

impl From<proxkit::Error> for CliError {
    fn from(e: proxkit::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<proxkit_core::CoreError> for CliError {
    fn from(e: proxkit_core::CoreError) -> Self {
        CliError::Config(e.to_string())
    }
}
