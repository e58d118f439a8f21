use thiserror::Error;

/// Toolkit-wide error type. The CLI maps variants onto exit codes:
/// `Parse` -> 2, `Domain` -> 3, `Invariant` -> 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        Error::Invariant(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
