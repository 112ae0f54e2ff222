use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("decode error at byte offset {offset}: {msg}")]
    Decode { offset: u64, msg: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// Row numbers count data rows from 1 (the header is not counted).
    #[error("format error at row {row}: {msg}")]
    Format { row: usize, msg: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("row-count mismatch: {left} rows vs {right} rows")]
    Alignment { left: usize, right: usize },

    #[error("column mismatch: expected {expected} features, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("no training segments selected; use longer intervals (each must span at least one full 120 ms segment)")]
    EmptyTraining,

    #[error("training data contains a single class ({0}); both classes are required")]
    SingleClass(String),

    #[error("no evaluable segments: none are fully covered by an annotation outside the training set")]
    NoEvaluableSegments,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
