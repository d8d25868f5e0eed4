use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or configuration value is unusable.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Two series that must share an interval grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    /// The regression design matrix is rank deficient.
    #[error("singular design: {0}")]
    SingularDesign(String),
    /// The requested computation is not supported for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A numeric argument falls outside the supported range.
    #[error("out of range: {0}")]
    OutOfRange(String),
    /// A statistic is undefined for the given data (e.g. zero variance).
    #[error("undefined: {0}")]
    Undefined(String),
    /// A text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },
    /// Filesystem failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
