use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("kick is off target (x = {end_x:.3}, z = {end_z:.3}); an on-target kick is required")]
    OffTarget { end_x: f64, end_z: f64 },

    #[error("history is not chronologically ordered at position {position}")]
    UnorderedHistory { position: usize },

    #[error("payoff cell ({row}, {col}) has no support")]
    EmptyCell { row: String, col: String },

    #[error("missing model artifact: {0}")]
    MissingModel(String),

    #[error("model task mismatch: expected {expected}, found {found}")]
    WrongTask { expected: String, found: String },

    #[error("ambiguous game match for {game}: candidates {candidates:?}")]
    AmbiguousGame { game: String, candidates: Vec<String> },

    #[error("stale model: feature schema hash {found} does not match {expected}")]
    SchemaMismatch { expected: String, found: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
