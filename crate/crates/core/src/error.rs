use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A requested sequence or grid is larger than the configured budget.
    #[error("capacity exceeded: {what} needs {requested} elements, budget is {limit}")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: usize,
    },

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root finder did not converge: {0}")]
    RootFinding(String),

    /// Malformed external data (coefficient files, exported grids).
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
