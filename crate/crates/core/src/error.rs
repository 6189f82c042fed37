use thiserror::Error;

/// Failure to read a label, permutation or input file.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub fn msg(message: impl Into<String>) -> Self {
        ParseError { line: None, message: message.into() }
    }

    pub fn at(line: usize, message: impl Into<String>) -> Self {
        ParseError { line: Some(line), message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    /// The line configuration violates a structural identity.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    /// Input is outside an operation's domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Degenerate data (zero discriminant, vanishing Coble quartic, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A place at which the requested quantity is not computable without further data.
    #[error("unsupported place: {0}")]
    UnsupportedPlace(String),

    /// A search exceeded its resource budget; `partial` describes what was completed.
    #[error("resource limit exceeded: {what} (partial: {partial})")]
    ResourceLimit { what: String, partial: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
