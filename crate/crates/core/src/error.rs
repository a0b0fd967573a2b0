use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid space: {0}")]
    Validation(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vertex `{0}` is not in the domain")]
    NotInDomain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no admissible path: {0}")]
    Infeasible(String),
    #[error("instance too large: {what} ({size} > {limit})")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("constant overflow: {0}")]
    Overflow(String),
    #[error("{stage}: {source}")]
    Stage { stage: String, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps the error with the name of the step that produced it.
    pub fn at(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
