use std::fmt;

use thiserror::Error;

/// A syntax or validation error at a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error("variable `{variable}` in `{statement}` has no constants to range over; declare some with #entity")]
    EmptyDomain { variable: String, statement: String },

    #[error("grounding would produce more than {limit} ground statements; raise the limit to proceed")]
    GroundingLimit { limit: usize },

    #[error("unsupported construct in `{statement}`: {reason}")]
    Unsupported { statement: String, reason: String },

    #[error("statement `{0}` is not ground; run the grounder first")]
    NotGround(String),

    #[error("generator {generator} fired but no selection was supplied for it")]
    UnresolvedGenerator { generator: String },

    #[error("invalid selection for generator {generator}: {reason}")]
    InvalidSelection { generator: String, reason: String },

    #[error("{points} binary choice points exceed the limit of {limit}; raise it with --max-choices or IG_MAX_CHOICES")]
    ChoiceLimit { points: u32, limit: u32 },

    #[error("{count} probabilistic switches exceed the limit of {limit}")]
    SwitchLimit { count: usize, limit: usize },

    #[error("programs use different atoms: only in first {only_first:?}, only in second {only_second:?}")]
    VocabularyMismatch {
        only_first: Vec<String>,
        only_second: Vec<String>,
    },

    #[error("conditioning event {0} has zero probability")]
    ZeroMass(String),

    #[error("invalid joint table: {0}")]
    InvalidTable(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
