use thiserror::Error;

/// Row-level failures while reading an observation file. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: expected 2 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: time is not a number")]
    NonNumeric { line: usize },
    #[error("line {line}: time is not finite")]
    NonFinite { line: usize },
    #[error("line {line}: negative time")]
    NegativeTime { line: usize },
    #[error("line {line}: label must be 0, 1 or 2")]
    InvalidLabel { line: usize },
    #[error("i/o failure: {0}")]
    Io(String),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match *self {
            ParseError::FieldCount { line, .. }
            | ParseError::NonNumeric { line }
            | ParseError::NonFinite { line }
            | ParseError::NegativeTime { line }
            | ParseError::InvalidLabel { line } => Some(line),
            ParseError::Io(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("model violation: {0}")]
    ModelViolation(String),
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
    #[error("degenerate support: {0}")]
    DegenerateSupport(String),
    #[error("unidentified: {0}")]
    Unidentified(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid spec document: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
