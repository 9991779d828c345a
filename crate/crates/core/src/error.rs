use thiserror::Error;

/// Errors raised by the solver and the verification routines.
///
/// Infeasibility is not an error: the operations that can detect it report it
/// through their return type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),

    #[error("{what} budget of {limit} exceeded")]
    BudgetExceeded { what: &'static str, limit: usize },

    #[error("bound has about {log2_estimate:.0} bits, more than the budget of {max_bits}")]
    BoundTooLarge { log2_estimate: f64, max_bits: u64 },

    #[error("basis is incomplete: no element is conformal to the remainder {0:?}")]
    IncompleteBasis(Vec<i64>),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
