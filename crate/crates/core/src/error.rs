use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate id {id:?} (first seen on line {first_line}, again on line {second_line})")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },

    #[error("dictionary is empty: no method rows found under {0}")]
    EmptyDictionary(PathBuf),

    #[error("cannot index an empty corpus")]
    EmptyCorpus,

    #[error("unknown document {0:?}")]
    UnknownDocument(String),

    #[error("no ground truth for query ids: {}", .0.join(", "))]
    MissingTruth(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero-norm vector")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("API {name:?} not found in dictionary{}", if *.ambiguous { " (ambiguous suffix)" } else { "" })]
    ApiNotFound { name: String, ambiguous: bool },

    #[error("question could not be parsed into a constituency form")]
    Unparsed,

    #[error("request to {endpoint} failed after {attempts} attempts: {message}")]
    Service {
        endpoint: String,
        attempts: u32,
        message: String,
    },

    #[error("no cached response for prompt {prompt_hash} (model {model}) and the mock backend cannot fetch")]
    CacheMiss { model: String, prompt_hash: String },

    #[error("template {name}: {message}")]
    Template { name: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
