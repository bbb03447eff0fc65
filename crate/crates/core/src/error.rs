use std::path::PathBuf;

/// Errors produced by the library.
///
/// Variants split into configuration/usage problems and data problems so the
/// CLI can map them onto distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("word not found in embedding table: {0:?}")]
    WordNotFound(String),

    #[error("document {doc_id:?} missing from annotation round {round:?}")]
    MissingDocument { doc_id: String, round: String },

    #[error("no (month, outlet) total for cell {month} / {outlet:?}")]
    MissingTotal { month: String, outlet: String },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the invocation or config rather than the data.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
