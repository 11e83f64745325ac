use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value failed validation. `field` names the offending key.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("slot {slot}: {source}")]
    Slot {
        slot: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    /// True for errors caused by bad user configuration rather than a runtime failure.
    pub fn is_config_error(&self) -> bool {
        match self {
            Error::Config { .. } | Error::Parse { .. } => true,
            Error::Slot { source, .. } => source.is_config_error(),
            _ => false,
        }
    }
}
