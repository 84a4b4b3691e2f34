use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid modulus {0}: expected a prime power below 2^32")]
    InvalidModulus(u64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("index ({row}, {col}) out of range for a {size}x{size} matrix")]
    IndexOutOfRange { row: usize, col: usize, size: usize },

    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("division by zero in F_p^2")]
    DivisionByZero,

    #[error("discrete logarithm of zero")]
    LogOfZero,

    #[error("Hecke operator index {0} equals the level")]
    PrimeIsLevel(u64),

    #[error("no modular polynomial table for level {0}")]
    UnsupportedLevel(u64),

    #[error("supersingular set violates an invariant: {0}")]
    SupersingularInvariant(String),

    #[error("no Hecke polynomial representation of the L-matrix within budget: {0}")]
    HeckePolynomialNotFound(String),

    #[error("element is not in (H^0)_+")]
    NotInPlusCuspidal,

    #[error("presentation invariant failed: {0}")]
    Presentation(String),

    #[error("alpha methods disagree: {0}")]
    AlphaDisagreement(String),

    #[error("spanning-tree enumeration over budget: {vertices} vertices (cap {cap})")]
    TreeBudget { vertices: usize, cap: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),
}
