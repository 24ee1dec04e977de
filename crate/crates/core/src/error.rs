use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("column {index}{} has zero variance", name.as_ref().map(|n| format!(" ({n})")).unwrap_or_default())]
    DegenerateColumn { index: usize, name: Option<String> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("replication {index}: {source}")]
    Replication { index: usize, source: Box<Error> },
}

impl Error {
    /// True for failures of the arithmetic itself rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SvdNonConvergence { .. } | Error::Singular(_) => true,
            Error::Replication { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
