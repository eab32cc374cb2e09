use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DepthError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("degenerate simplex: centered matrix is singular")]
    DegenerateSimplex,

    #[error("unsupported dimension {got}: {what} requires d = {expected}")]
    UnsupportedDimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("instance too large for naive oracle: {count} subsets exceeds cap {cap}")]
    TooLarge { count: u128, cap: u128 },

    #[error("degenerate gap profile: all depths are equal")]
    DegenerateProfile,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for DepthError {
    fn from(e: std::io::Error) -> Self {
        DepthError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DepthError>;

pub(crate) fn invalid(msg: impl Into<String>) -> DepthError {
    DepthError::InvalidArgument(msg.into())
}
