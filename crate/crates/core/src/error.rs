use thiserror::Error;

/// Broad failure classes. The CLI maps each one to its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Capacity,
    Embedding,
    Solver,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("problem has {needed} variables, exhaustive search is capped at {cap}")]
    Capacity { needed: usize, cap: usize },
    #[error("embedding failed: {0}")]
    Embedding(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Input(_) | Error::Parameter(_) | Error::Degenerate(_) | Error::Json(_) | Error::Csv(_) => {
                ErrorKind::Input
            }
            Error::Capacity { .. } => ErrorKind::Capacity,
            Error::Embedding(_) => ErrorKind::Embedding,
            Error::Solver(_) => ErrorKind::Solver,
            Error::Stage { source, .. } => source.kind(),
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
