use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("views not a partition: {reason} (feature ids: {features:?})")]
    ViewPartition { reason: String, features: Vec<u32> },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("unknown view {0}")]
    UnknownView(usize),

    #[error("stratification error: class `{class}` has {count} examples, need at least {folds}")]
    Stratification {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("empty test set")]
    EmptyTestSet,

    #[error("could not draw a class-complete bootstrap sample after {0} attempts")]
    Bootstrap(usize),

    /// A strategy was asked to use a capability its inputs do not provide,
    /// e.g. confidence-based selection over a learner that has no confidences.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no contention points")]
    NoContention,

    #[error("inconsistent training set: {0}")]
    InconsistentTrainingSet(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by a bad configuration or bad input files,
    /// as opposed to contract failures discovered while running.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Context { source, .. } => source.is_config_error(),
            Error::Parse { .. }
            | Error::ViewPartition { .. }
            | Error::UnknownLabel(_)
            | Error::Config(_)
            | Error::Json(_)
            | Error::Io(_) => true,
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
