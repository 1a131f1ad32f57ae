use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("column `{0}` has zero variance")]
    DegenerateColumn(String),

    #[error("split would leave an empty side ({n_train} train / {n_test} test)")]
    EmptySplit { n_train: usize, n_test: usize },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    DivergedTraining { epoch: usize },

    #[error("design matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },

    #[error("tree {tree} has no out-of-bag records")]
    EmptyOob { tree: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("smoothing window {window} is invalid for {len} values")]
    WindowTooLarge { window: usize, len: usize },

    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),

    #[error("missing NT label at record {0}")]
    MissingLabel(usize),

    #[error("unsupported model document: {0}")]
    BadModelDocument(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem or file contents rather
    /// than by model fitting.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::MalformedRow { .. }
                | Error::SchemaMismatch(_)
                | Error::BadModelDocument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
