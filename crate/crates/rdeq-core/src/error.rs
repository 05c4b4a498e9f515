//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by validation and evaluation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A vector that should be a pmf has a negative entry or does not sum
    /// to one within tolerance.
    #[error("invalid pmf for {name}: {reason}")]
    InvalidPmf { name: String, reason: String },

    /// Axis sizes of two objects that must agree do not.
    #[error("dimension mismatch on axis {axis}: expected {expected}, got {got}")]
    DimensionMismatch {
        axis: &'static str,
        expected: usize,
        got: usize,
    },

    /// An operation referenced an axis the joint does not carry, or passed
    /// overlapping variable sets.
    #[error("bad variable set: {0}")]
    BadVarSet(String),

    /// An auxiliary alphabet exceeds the admissible support size.
    #[error("cardinality bound exceeded: |{var}| = {got} > {cap} ({mode} mode)")]
    CardinalityExceeded {
        var: &'static str,
        got: usize,
        cap: usize,
        mode: &'static str,
    },

    /// A required Markov separation does not hold.
    #[error("Markov chain violated: {chain} (leak {leak:.3e} bits)")]
    MarkovViolation { chain: String, leak: f64 },

    /// A requested operating point is infeasible (e.g. a distortion target
    /// below the minimum achievable for the given quantization rates).
    #[error("infeasible input: {0}")]
    Infeasible(String),

    /// An exact-enumeration routine would exceed the configured cost cap.
    #[error("enumeration cap exceeded: estimated cost {estimate:.3e} > cap {cap:.3e}")]
    EnumerationCap { estimate: f64, cap: f64 },

    /// Malformed source-description file.
    #[error("bad source file: {0}")]
    BadSourceFile(String),
}
