use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty training partition")]
    EmptyTrainingPartition,

    #[error("dimension mismatch: expected {expected} attributes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class {class} has {count} members, fewer than the {required} required")]
    ClassTooSmall {
        class: usize,
        count: usize,
        required: usize,
    },

    #[error("invalid split fractions: {0}")]
    InvalidFractions(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("training set contains a single class")]
    SingleClass,

    #[error("invalid hyperparameter `{name}`: {reason}")]
    InvalidHyperparameter { name: String, reason: String },

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("operation requires a tree-based model, got {0}")]
    NotTreeModel(String),

    #[error("no features")]
    NoFeatures,

    #[error("kind mismatch: {0}")]
    KindMismatch(String),

    #[error("no variance")]
    NoVariance,

    #[error("power iteration did not converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("covariance matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model artifact: {0}")]
    Artifact(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn hyper(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidHyperparameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
