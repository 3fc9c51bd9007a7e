use thiserror::Error;

pub type Result<T> = std::result::Result<T, GciError>;

#[derive(Debug, Error)]
pub enum GciError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown variable: {0}")]
    UnknownVariable(String),

    #[error("undefined strength for {treatment} -> {outcome}: {reason}")]
    UndefinedStrength {
        treatment: String,
        outcome: String,
        reason: String,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<GciError>,
    },
}

impl GciError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        GciError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GciError::InvalidArgument(msg.into())
    }
}
