use thiserror::Error;

use crate::tree::NodeKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A square node system could not be inverted.
    #[error("singular system{}", match .node { Some(k) => format!(" at {k}"), None => String::new() })]
    Singular { node: Option<NodeKey> },

    /// The algorithm reached the root with more unknowns than equations.
    #[error("underdetermined: {unresolved} coefficient(s) left unresolved at the root")]
    Underdetermined { unresolved: usize },

    #[error("skewness is undefined for a null system")]
    NullSystem,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for the failure modes the algorithms themselves report, as opposed
    /// to malformed input or I/O trouble.
    pub fn is_algorithm_failure(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::Underdetermined { .. })
    }
}
