use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CascadeError>;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("interaction references post {found:?} but builder was given post {expected:?}")]
    UnknownPost { expected: String, found: String },

    #[error("invalid step/horizon: step={step} horizon={horizon} (step must be > 0 and divide horizon)")]
    InvalidStep { step: u32, horizon: u32 },

    #[error("degenerate graph: {0}")]
    DegenerateGraph(&'static str),

    #[error("degenerate degree sequence (zero variance)")]
    DegenerateDegrees,

    #[error("empty series")]
    EmptySeries,

    #[error("training data contains a single class")]
    SingleClassTraining,

    #[error("schema mismatch: model expects {expected}, got {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("both classes must be present")]
    SingleClass,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("too few samples: class {class} has {count} rows, need at least {needed}")]
    TooFewSamples { class: &'static str, count: usize, needed: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CascadeError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CascadeError::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        CascadeError::Parse { path: path.into(), line, message: message.into() }
    }
}
