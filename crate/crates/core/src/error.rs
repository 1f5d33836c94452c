use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Exploration or materialization exceeded the configured budget.
    #[error("resource limit exceeded: {what} needs more than {budget} states")]
    ResourceLimit { what: &'static str, budget: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("symbol collision: `{0}` is generated twice or clashes with an input name")]
    SymbolCollision(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
