use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input lies outside the domain of a geometric or physical relation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The belief covariance could not be factorized even after jitter.
    #[error("covariance factorization failed after {attempts} jitter attempts")]
    Factorization { attempts: usize },

    #[error("malformed ping line: {0}")]
    MalformedPing(String),

    #[error("config error at key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("unknown measurement source `{0}`")]
    UnknownSource(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by a bad scenario configuration.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::UnknownSource(_))
    }
}
