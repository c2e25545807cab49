use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value. `key` names the offending setting.
    #[error("configuration error ({key}): {message}")]
    Config { key: String, message: String },

    #[error("invalid input: {0}")]
    Input(String),

    /// PAPR or RMS of an all-zero signal.
    #[error("PAPR and RMS are undefined for an all-zero signal")]
    UndefinedPapr,

    #[error("degenerate channel: |h1|^2 + |h2|^2 == 0")]
    DegenerateChannel,

    #[error("side information error: {0}")]
    SideInfo(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors a user fixes by changing configuration.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}
