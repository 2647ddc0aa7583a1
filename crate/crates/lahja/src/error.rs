use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by corpus ingestion, model training, and persistence.
#[derive(Debug, Error)]
pub enum LahjaError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown label token {token:?}")]
    Label { token: String },

    #[error("duplicate document id {id:?} (lines {first_line} and {second_line})")]
    DuplicateId {
        id: String,
        first_line: usize,
        second_line: usize,
    },

    #[error("document {id:?} is missing the {field} label required for stratification")]
    MissingLabel { id: String, field: &'static str },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("vocabulary is empty: no word reached min_count")]
    EmptyVocabulary,

    #[error("no {context} word is in the vocabulary: {words:?}")]
    NoWordsInVocabulary { context: String, words: Vec<String> },

    #[error("query vector has zero norm")]
    ZeroNormQuery,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("bad model file: {0}")]
    Format(String),

    #[error("model file truncated at byte offset {offset}")]
    Truncated { offset: u64 },

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, LahjaError>;

impl LahjaError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LahjaError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        LahjaError::Parse {
            line,
            message: message.into(),
        }
    }
}
