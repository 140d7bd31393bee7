use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset not found: {0}")]
    DatasetNotFound(PathBuf),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported attribute `{name}`: {kind}")]
    UnsupportedAttribute { name: String, kind: String },
    #[error("missing value at line {line}, attribute `{attribute}`")]
    MissingValue { line: usize, attribute: String },
    #[error("non-numeric value `{value}` at row {row}, column {column}")]
    NonNumeric { row: usize, column: usize, value: String },
    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("class column has a single distinct value `{0}`")]
    SingleClass(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("resample quota {quota} exceeds size {available} of class {class}")]
    QuotaExceedsClass { class: usize, quota: usize, available: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("too few observations: need at least {needed}, found {found}")]
    TooFewObservations { needed: usize, found: usize },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("timing model has not been fitted (no design matrix)")]
    Unfitted,
    #[error("timer resolution failure: {0}")]
    TimerResolution(String),
    #[error("statistics error: {0}")]
    Stats(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("unknown classifier `{0}`")]
    UnknownClassifier(String),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
