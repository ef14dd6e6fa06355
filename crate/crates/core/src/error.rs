use thiserror::Error;

/// Errors produced by the projection, certification and LP routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector norm is below the zero tolerance")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("point is not contained in the set")]
    PointNotInSet,
    #[error("starting point is not contained in set A")]
    StartNotInA,
    #[error("projection did not converge within {max_iter} sweeps")]
    NotConverged { max_iter: usize },
    #[error("nearest-pair certificate failed (residuals {residual_a:.3e}, {residual_b:.3e})")]
    CertificateFailed { residual_a: f64, residual_b: f64 },
    #[error("polyhedron appears to be empty")]
    EmptyPolyhedron,
    #[error("row {index} of the constraint matrix is zero")]
    DegenerateRow { index: usize },
    #[error("invalid distance: {0}")]
    InvalidDistance(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lower bound M is not strictly below the optimal value")]
    LowerBoundNotStrict,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("linear program has no feasible vertex")]
    Infeasible,
    #[error("problem too large for vertex enumeration (n = {n}, m = {m})")]
    TooLarge { n: usize, m: usize },
    #[error("invalid set descriptor: {0}")]
    InvalidDescriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
