use std::path::PathBuf;

use crate::model::{AgentId, ItemId, Source};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("constraint violated on `{field}`: {reason}")]
    ConstraintViolation { field: String, reason: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("agent {0} cannot share with itself")]
    SelfShare(AgentId),

    #[error("rating history is empty")]
    EmptyHistory,

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("insufficient data: {rows} rows, at least {required} required")]
    InsufficientData { rows: usize, required: usize },

    #[error("feature column {column} has zero variance")]
    DegenerateFeature { column: usize },

    #[error("model has not been fitted")]
    UnfittedModel,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("event at t={got} precedes last recorded t={last}")]
    TimeRegression { last: u32, got: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("missing demographic attribute `{0}`")]
    MissingAttribute(&'static str),

    #[error("unknown item {0}")]
    UnknownItem(ItemId),

    #[error("unknown source {0}")]
    UnknownSource(Source),

    #[error("no interactions to train on")]
    EmptyInteractions,

    #[error("every agent has an empty ground-truth set")]
    AllEmptyGroundTruth,

    #[error("every agent has an empty liked-item set")]
    AllEmptyLikes,

    #[error("agent sets differ: {left} vs {right} agents")]
    AgentSetMismatch { left: usize, right: usize },

    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Schema {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: dangling reference to {id}", path.display())]
    DanglingReference { path: PathBuf, id: String },

    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn constraint(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConstraintViolation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
