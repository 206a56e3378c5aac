//! Crate-wide error type.
//!
//! Everything fallible in the crate returns [`enum@Error`]; check suites
//! distinguish *reported failures* (a passing run of the suite that found a
//! law violated — not an `Err`) from *errors* (bad input, singular
//! evaluation, malformed corpus).

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// All failure modes of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A point fell outside the open box (or failed the domain predicate)
    /// a map is declared on.
    #[error("domain violation: {0}")]
    Domain(String),

    /// An elementary function was evaluated where it has no derivative
    /// data (log/sqrt at a nonpositive point, division by zero, ...).
    #[error("singular evaluation: {0}")]
    SingularEval(String),

    /// Two tangent elements that must share a base point do not.
    #[error("base points differ by {gap:e} (allowed {tol:e}) in {context}")]
    BaseMismatch { gap: f64, tol: f64, context: String },

    /// An element required to lie in the vertical kernel has a nonzero
    /// forbidden slot.
    #[error("kernel violation: |{slot}| = {residual:e} exceeds {tol:e}")]
    KernelViolation { slot: String, residual: f64, tol: f64 },

    /// Structural arity disagreement (wrong number of components,
    /// mismatched dimensions).
    #[error("arity mismatch in {context}: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize, context: String },

    /// Corpus or expression text failed to parse.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// An expression referenced a variable beyond the declared arity.
    #[error("undefined variable x{index} (declared arity {arity})")]
    UndefinedVariable { index: usize, arity: usize },

    /// A derivative was requested from an expression node that only
    /// supports jet-level differentiation.
    #[error("no symbolic derivative for {0}; use jet evaluation")]
    NonSymbolicDerivative(String),

    /// Space registry lookup failed.
    #[error("unknown space `{0}`")]
    UnknownSpace(String),

    /// A corpus member violates the contract of the space it was declared
    /// for (e.g. a "plot" whose image leaves the carrier).
    #[error("corpus violation: {0}")]
    CorpusViolation(String),

    /// A matrix needed invertible was numerically singular even after
    /// resampling.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// Contraction was applied to a degree-0 form.
    #[error("degree underflow: {0}")]
    DegreeUnderflow(String),

    /// Underlying I/O failure (corpus files, report output).
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether this error is a usage/input problem (as opposed to a
    /// numerical condition encountered mid-computation). The command-line
    /// tool maps usage errors to exit code 2.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::UndefinedVariable { .. }
                | Error::UnknownSpace(_)
                | Error::ArityMismatch { .. }
                | Error::Io(_)
        )
    }
}
