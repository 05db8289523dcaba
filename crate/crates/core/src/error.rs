use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("incompatible fingerprint: {0}")]
    IncompatibleFingerprint(String),

    #[error("unsupported format in {path}: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("corrupt file {path}: {reason}")]
    CorruptFile { path: PathBuf, reason: String },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by the caller's arguments rather than by the
    /// environment or the data on disk.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::InvalidParameter(_)
                | Error::InsufficientData(_)
                | Error::IncompatibleFingerprint(_)
                | Error::UnknownStrategy { .. }
        )
    }
}
