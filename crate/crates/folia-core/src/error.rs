//! Error type shared by the whole kernel.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by kernel operations.
///
/// `Inconsistency` is reserved for violations of identities that are
/// mathematically guaranteed (Bott cross-checks, sanity flags of a
/// certificate run); seeing one means a bug or a degenerate prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Operands live over different coefficient fields.
    FieldMismatch,
    /// Dimension, degree or grade mismatch between operands.
    Shape(String),
    /// Structurally valid input on which the operation is undefined
    /// (zero lambda tensor, dependent residue vectors, ...).
    Degenerate(String),
    /// Rejection sampling exceeded its budget.
    Sampling(String),
    /// A scalar string could not be parsed in the active field.
    Parse(String),
    /// An internal cross-check failed; carries a diagnostic dump.
    Inconsistency(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::FieldMismatch => write!(f, "operands belong to different coefficient fields"),
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::Sampling(msg) => write!(f, "sampling failed: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Inconsistency(msg) => write!(f, "internal consistency check failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
