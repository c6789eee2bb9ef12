use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An instance is too large to materialize or search exhaustively.
    #[error("{what} needs {needed} entries, over the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    /// The requested operating point does not exist for these dimensions.
    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("malformed channel file: {0}")]
    ChannelFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
