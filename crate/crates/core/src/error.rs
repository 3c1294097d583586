use std::path::PathBuf;

use thiserror::Error;

use crate::model::{VersionId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Scenario(Violation),

    #[error("{table}: line {line}: {message}")]
    Table {
        table: &'static str,
        line: u64,
        message: String,
    },

    #[error("unknown version {0}")]
    UnknownVersion(VersionId),

    #[error("no candidates: the scenario has no non-baseline version")]
    NoCandidates,

    #[error("instance too large for oracle: {candidates} candidates (limit {limit})")]
    InstanceTooLarge { candidates: usize, limit: usize },

    #[error("invalid constraints: {0}")]
    Constraints(String),

    #[error("no training data")]
    NoTrainingData,

    #[error("feature arity: expected {expected}, got {got}")]
    FeatureArity { expected: usize, got: usize },

    #[error("model incomplete: no model for version {0}")]
    ModelIncomplete(VersionId),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate actuals: all actual values equal the training mean")]
    DegenerateActuals,

    #[error("too few samples: {samples} samples for {folds} folds")]
    TooFewSamples { samples: usize, folds: usize },

    #[error("invalid dispatcher: {0}")]
    InvalidDispatcher(String),

    #[error("dispatcher parse error at line {line}: {message}")]
    DispatcherParse { line: usize, message: String },

    #[error("template: {0}")]
    Template(String),

    #[error("zero baseline size")]
    ZeroBaselineSize,

    #[error("version {0} is absent from the test scenario")]
    MissingFromTest(VersionId),

    #[error("invalid synthetic config: {0}")]
    SynthConfig(String),

    #[error("config: {0}")]
    Config(String),

    #[error("report parse error at line {line}: {message}")]
    ReportParse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error is caused by bad input rather than by the tool.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. })
    }
}
