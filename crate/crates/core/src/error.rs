use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An `(n, r, M)` query violates a precondition.
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    /// Codes of different dimension were combined.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    /// The operation needs at least one point in the code.
    #[error("empty code")]
    EmptyCode,

    /// Exhaustive enumeration would exceed the configured budget.
    #[error("enumeration budget exceeded: {required} subsets required, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },

    /// Two independent computations of the same exact quantity disagreed.
    /// This always indicates a bug.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    /// A probability vector argument is malformed or has a support violation.
    #[error("support violation: {0}")]
    Support(String),
}

pub type Result<T> = std::result::Result<T, Error>;
