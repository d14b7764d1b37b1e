//! Crate-wide error type.

use thiserror::Error;

/// Hard cap on dense operator dimension. Anything larger than this is a
/// sign that a construction escaped desk scale.
pub const DIM_CAP: usize = 4096;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("operator dimension {dim} exceeds the dense-storage cap {cap}")]
    DimOverflow { dim: usize, cap: usize },

    #[error("label {0} not present in space list")]
    UnknownLabel(String),

    #[error("not a permutation of the space list")]
    NotAPermutation,

    #[error("matrix is not Hermitian within {tol:e} (deviation {dev:e})")]
    NotHermitian { dev: f64, tol: f64 },

    #[error("operator is not positive semidefinite within {tol:e} (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64, tol: f64 },

    #[error("matrix is not unitary within {tol:e} (deviation {dev:e})")]
    NotUnitary { dev: f64, tol: f64 },

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("Kraus operators do not sum to a trace-preserving map (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("operator family is linearly dependent (Gram condition number {cond:e} exceeds {max:e})")]
    LinearDependence { cond: f64, max: f64 },

    #[error("invalid instrument: {0}")]
    InvalidInstrument(String),

    #[error("causality violation at level {level} (residual {residual:e})")]
    CausalityViolation { level: u32, residual: f64 },

    #[error("invalid classical probability table: {0}")]
    InvalidTable(String),

    #[error("invalid scenario parameter: {0}")]
    InvalidParameter(String),

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
