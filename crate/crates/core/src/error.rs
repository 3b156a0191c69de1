use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("Helstrom weights must be nonnegative and sum to 1 (got {p1} + {p2})")]
    InvalidWeights { p1: f64, p2: f64 },

    #[error("quantum map has no Kraus or Choi representation")]
    MissingRepresentation,

    #[error("invalid quantum map: {0}")]
    InvalidMap(String),

    #[error("map is not invertible (smallest singular value {smallest_singular_value:.3e})")]
    NonInvertible { smallest_singular_value: f64 },

    #[error("decoherence function vanishes at t = {time} (|G| = {modulus:.3e})")]
    ZeroCrossing { time: f64, modulus: f64 },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative transition rate W[{row}][{col}] = {value:.3e} at t = {time}")]
    NegativeRate { row: usize, col: usize, value: f64, time: f64 },

    #[error("generator does not preserve diagonality (leakage {leakage:.3e})")]
    NotDiagonalPreserving { leakage: f64 },

    #[error("reduced state has a degenerate eigenbasis (gap {gap:.3e}); pass an explicit basis")]
    DegenerateBasis { gap: f64 },

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("unnormalized spectrum (total weight {total})")]
    Unnormalized { total: f64 },
}
