use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("linear system has no solution")]
    NoSolution,
    #[error("matrix is not skew-symmetric (symmetric with zero diagonal)")]
    NotSkewSymmetric,
    #[error("skew-symmetric matrix of size {size} has rank {rank}, expected full rank")]
    NotSymplectic { rank: usize, size: usize },
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("invalid theta matrix: {0}")]
    InvalidTheta(String),
    #[error("invalid cipher: {0}")]
    InvalidCipher(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("dim R^2 = {0}, operation requires dim R^2 = 1")]
    NotUniDimensional(usize),
    #[error("direct-sum automorphism condition violated: {0}")]
    DirectSumCondition(String),
    #[error(
        "non-deterministic linear-layer transition: diffusion layer is not an automorphism of the circle operation"
    )]
    NonDeterministicLinearLayer,
    #[error("insufficient pairs: got {got}, need at least {min}")]
    InsufficientPairs { got: usize, min: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
