//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs outside an operation's domain (non-finite vectors, t outside [0,1], ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Vector/layout shape mismatches.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A function space that violates its construction requirements
    /// (constants not representable, dependent basis, ...).
    #[error("invalid function space: {0}")]
    SpaceInvalid(String),

    /// A graph point that fails the equilibrium-membership invariant.
    #[error("invalid graph point: {0}")]
    InvalidPoint(String),

    /// Expression syntax error with source position.
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// Expression evaluation failure (division by zero, non-finite result).
    #[error("evaluation error: {0}")]
    Eval(String),

    /// Document schema violation, with the offending field path.
    #[error("schema error at `{path}`: {msg}")]
    Schema { path: String, msg: String },

    /// Numeric failure of an internal algorithm (LP infeasibility where
    /// feasibility is expected, duality gap above tolerance, singular system).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A solver ran out of budget; carries the best residual it reached.
    #[error("budget exhausted: best residual {best_residual:.3e} ({detail})")]
    BudgetExhausted { best_residual: f64, detail: String },

    /// The continuation construction found no joint plan at a required prior.
    /// Not a proof of nonexistence; the search is restricted by design.
    #[error("continuation unavailable: {0}")]
    ContinuationUnavailable(String),

    /// CLI or file configuration problems.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit-code class used by the CLI: configuration problems are
    /// distinguished from numeric/certificate failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Dimension(_)
                | Error::Parse { .. }
                | Error::Schema { .. }
                | Error::Config(_)
                | Error::Io(_)
        )
    }
}
