use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point is not in the set (max-norm distance {distance:.3e})")]
    PointNotInSet { distance: f64 },
    #[error("the set is empty")]
    EmptySet,
    #[error("syntax error at position {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("domain error at evaluation point: {0}")]
    DomainError(String),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("direction is not tangent at the base point")]
    DirectionNotTangent,
    #[error("subregularity modulus kappa required but not provided")]
    MissingKappa,
    #[error("problem size exceeds the desk-scale cap: {0}")]
    ScaleCapExceeded(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("simplicial refinement depth cap exceeded")]
    DepthCapExceeded,
    #[error("multiplier set is empty")]
    EmptyMultiplierSet,
    #[error("extended-real arithmetic is undefined: {0}")]
    UndefinedArithmetic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
