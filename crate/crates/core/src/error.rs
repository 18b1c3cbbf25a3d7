use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("failed to load parameters: {0}")]
    Load(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Internal(_) | Error::QuadratureFailure(_) => 2,
            _ => 1,
        }
    }
}
