//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// The underlying byte stream could not be read or decoded any further.
    /// Distinct from a malformed record, which is skipped and counted.
    #[error("unreadable stream at byte offset {offset}: {message}")]
    Stream { offset: u64, message: String },

    /// A record file contained a line that does not parse.
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: u64,
        message: String,
    },

    /// A file could not be opened or created.
    #[error("{path}: {message}")]
    File { path: String, message: String },

    /// Account links violated uniqueness; the message lists the offenders.
    #[error("account link validation failed: {0}")]
    LinkValidation(String),

    /// A similarity query referenced an item the corpus does not know.
    #[error("unknown item {0}")]
    UnknownItem(String),

    /// Vocabulary construction needs at least one question with tags.
    #[error("vocabulary requires at least one question item")]
    EmptyVocabularySource,

    #[error("insufficient positives: requested {requested}, available {available}")]
    InsufficientPositives { requested: usize, available: usize },

    /// Rejection sampling could not find enough unseen pairs.
    #[error(
        "negative sampling exhausted: accepted {accepted} of {requested} \
         after {attempts} attempts"
    )]
    NegativeSamplingExhausted {
        requested: usize,
        accepted: usize,
        attempts: u64,
    },

    /// Training data must contain both classes.
    #[error("training data contains a single class")]
    SingleClass,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A TOML configuration file did not parse or validate.
    #[error("config error: {0}")]
    Config(String),
}
