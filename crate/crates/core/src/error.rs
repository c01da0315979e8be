use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("did not converge: {0}")]
    Convergence(String),
    #[error("dimension guard: {0}")]
    Dimension(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
