use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("letter {letter} out of range for an alphabet of size {d}")]
    LetterOutOfRange { letter: usize, d: usize },

    #[error("point outside the domain (norm {norm} is not below 1)")]
    OutsideDomain { norm: f64 },

    #[error("matrix is singular or ill-conditioned (condition number {cond:e})")]
    IllConditioned { cond: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("linear system is singular")]
    Singular,

    #[error("word cap exceeded: {needed} words needed, cap is {cap}")]
    WordCap { needed: usize, cap: usize },

    #[error("inconsistent constraints: {0}")]
    InconsistentConstraints(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
