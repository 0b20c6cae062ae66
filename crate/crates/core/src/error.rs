use thiserror::Error;

/// Errors raised anywhere in the encoding, solving and stereo pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("unsupported structure: {0}")]
    Structure(String),

    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("bundle {bundle} at level {level} failed: {source}")]
    Bundle {
        level: usize,
        bundle: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(offset: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: msg.into(),
        }
    }

    /// Innermost error, looking through bundle wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Bundle { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
