//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A register, matrix, or channel exceeds a documented size cap.
    #[error("dimension too large: {what} is {got}, limit {limit}")]
    DimensionTooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    /// Operand shapes do not line up (matrix product, tensor block, ...).
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A program failed structural validation (bad qubit index, unknown gate,
    /// duplicate targets, read of an unwritten classical slot, ...).
    #[error("invalid program: {0}")]
    InvalidProgram(String),

    /// Inversion was requested for a program containing a measurement, reset,
    /// or classically controlled instruction.
    #[error("not invertible: {0}")]
    NotInvertible(String),

    /// A scalar argument is outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical invariant (normalization, Hermiticity, positivity,
    /// trace preservation, unitarity) failed its tolerance.
    #[error("numerical invariant violated: {0}")]
    NumericalInvariant(String),

    /// Two independent computations of the same fact disagree. Always a bug.
    #[error("internal consistency error: {0}")]
    InternalInconsistency(String),

    /// File I/O failed (suite export/import, program files).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
