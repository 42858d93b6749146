use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file was readable but its contents violate the expected format.
    #[error("{origin}:{line}: {message}")]
    Format {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("vocabulary is empty after applying min_count={min_count}")]
    EmptyVocabulary { min_count: u64 },

    #[error("training needs at least two distinct labels, found {found}")]
    SingleClass { found: usize },

    #[error("non-finite loss during {stage} at {at}")]
    NonFiniteLoss { stage: &'static str, at: String },

    #[error("training loss increased during {stage} at iteration {iteration}")]
    LossIncreased {
        stage: &'static str,
        iteration: usize,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(origin: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            origin: origin.into(),
            line,
            message: message.into(),
        }
    }
}
