use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical divergence: {0}")]
    Divergence(String),

    #[error("{0}")]
    Model(kdgf::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// 2 for bad input, 3 for divergence, 1 for anything environmental.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Model(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Io { .. } | CliError::Csv(_) | CliError::Json(_) => 1,
        }
    }
}

impl From<kdgf::Error> for CliError {
    fn from(e: kdgf::Error) -> Self {
        match e {
            kdgf::Error::Divergence { .. } => CliError::Divergence(e.to_string()),
            other => CliError::Model(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
