use thiserror::Error;

/// Errors produced by the simulator and its estimators.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters in an environment, tree shape or experiment config.
    #[error("configuration error: {0}")]
    Config(String),

    /// A call whose arguments violate the operation's preconditions.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An explicit initial tree that is not a tree.
    #[error("tree construction failed: {0}")]
    Construction(String),

    /// A backbone could not be extracted because the source tree lacks a
    /// loop at the far end of the path.
    #[error("backbone shape violation: {0}")]
    ShapeViolation(String),

    #[error("output error: {0}")]
    Output(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

impl Error {
    /// Process exit status for command line front ends: 2 for bad input,
    /// 3 for output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Output(_) => 3,
            _ => 2,
        }
    }
}
