use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid architecture: {0}")]
    InvalidArchitecture(String),

    /// Output activation / loss / class-count combinations the engine refuses to train.
    #[error("incompatible configuration: {0}")]
    IncompatibleConfiguration(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value at index {index}: {context}")]
    NonFinite { index: usize, context: String },

    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown label {label:?} at row {row}")]
    Labeling { row: usize, label: String },

    #[error("preprocessing left no usable feature columns")]
    EmptyFeatureSpace,

    #[error("{path}: {source}")]
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

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the input data rather than by the program.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::Labeling { .. }
                | Error::EmptyFeatureSpace
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
                | Error::Dimension(_)
                | Error::NonFinite { .. }
        )
    }
}
