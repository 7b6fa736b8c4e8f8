use proxkit_core::CoreError;
use thiserror::Error;

/// Errors raised by the prox catalog, smooth models, and solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Propagated vector/operator error (dimension mismatches and the like).
    #[error(transparent)]
    Core(#[from] CoreError),

    /// A starting point violates a domain hypothesis (e.g. infinite f-value).
    #[error("domain error: {0}")]
    Domain(String),

    /// A solver or builder was configured outside its admissible regime.
    #[error("config error: {0}")]
    Config(String),

    /// The request is outside what the closed catalog supports.
    #[error("capability error: {0}")]
    Capability(String),

    /// A diagnostic reference value is inconsistent with observed data.
    #[error("reference error: {0}")]
    Reference(String),
}

impl Error {
    pub fn dim(context: impl Into<String>, expected: usize, got: usize) -> Self {
        Error::Core(CoreError::dim(context, expected, got))
    }
}
