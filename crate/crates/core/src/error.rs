use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside its mathematical domain (e.g. a day or period index).
    #[error("domain error: {0}")]
    Domain(String),

    /// The instance or solution breaks a model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A solution refers to sections or faculty that the instance does not contain.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// No hard-feasible assignment could be constructed.
    #[error("infeasible: no hard-feasible staffing found for section `{section}` after {attempts} attempts")]
    Infeasible { section: String, attempts: usize },

    #[error("generation error: {0}")]
    Generation(String),

    /// A solver was started from a solution that violates hard constraints.
    #[error("precondition error: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
