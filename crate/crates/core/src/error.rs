use thiserror::Error;

/// Errors raised by learners, samplers, environments and the harness.
///
/// The variants map onto the CLI exit codes: `Validation` and `Ingestion`
/// are configuration problems, `Contract`, `Dimension` and `Numerical` are
/// violations of a numerical contract at run time.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("ingestion error at line {line}: {message}")]
    Ingestion { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension { expected, got })
        }
    }

    /// True for configuration-level failures (as opposed to numerical ones).
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Ingestion { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
