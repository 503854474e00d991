use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid set descriptor: {0}")]
    InvalidSet(String),

    #[error("point is not on the set (distance {distance:.3e})")]
    NotOnSet { distance: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle guard exceeded: grid of {grid} points with N = {n} (limits: 64 points, N <= 4)")]
    GuardExceeded { grid: usize, n: usize },

    #[error("unknown strategy `{0}` (expected smoothed_ascent, exchange or anneal)")]
    UnknownStrategy(String),

    #[error("unsupported domain: {0}")]
    Unsupported(String),

    #[error("singular least-squares fit: {0}")]
    SingularFit(String),

    #[error("{key}: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
