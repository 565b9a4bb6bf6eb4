use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum GesiError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("audio contains no samples")]
    EmptyAudio,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("reference ({reference_s:.3} s) and test ({test_s:.3} s) durations differ by more than 5%")]
    DurationMismatch { reference_s: f64, test_s: f64 },

    #[error("signal too short: {0}")]
    TooShort(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("missing field `{field}` ({context})")]
    MissingField { field: &'static str, context: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl GesiError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GesiError::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GesiError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad caller parameters rather than bad data.
    pub fn is_usage(&self) -> bool {
        matches!(self, GesiError::InvalidArgument(_))
    }
}

pub type Result<T> = std::result::Result<T, GesiError>;
