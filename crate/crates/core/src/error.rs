use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {requested} out of range (have {available})")]
    Range { requested: usize, available: usize },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("eigensolver did not converge after {iterations} block steps (basis {basis_dim}, worst relative residual {worst_residual:.3e})")]
    Solver {
        iterations: usize,
        basis_dim: usize,
        worst_residual: f64,
    },

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("cannot certify: {0}")]
    Uncertified(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
