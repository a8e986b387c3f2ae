use thiserror::Error;

/// Errors produced by the encoding, reconstruction and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error("ensemble mismatch: {0}")]
    EnsembleMismatch(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short machine-readable category, used for `ERROR:<category>` diagnostics.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Format(_) => "format",
            Error::Ingestion(_) => "ingestion",
            Error::EnsembleMismatch(_) => "ensemble-mismatch",
            Error::Degenerate(_) => "degenerate-input",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
