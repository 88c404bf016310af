use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A mechanism or estimator ran out of rounds.
    #[error("round budget exhausted after {used} of {budget} submissions")]
    BudgetExhausted { used: usize, budget: usize },

    /// The requested `(n, k, beta)` falls outside the regime where the
    /// mechanism parameters are defined.
    #[error("parameter regime violated: {0}")]
    ParameterRegime(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output differs from golden file {}", path.display())]
    GoldenMismatch { path: PathBuf },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
