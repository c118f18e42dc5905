use thiserror::Error;

/// Errors raised by generators, solvers and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A symmetric positive-definite factorization broke down.
    #[error("linear system is numerically singular")]
    Singular,

    #[error("least-squares subproblem on {columns} columns is rank deficient (rank {rank})")]
    RankDeficient { columns: usize, rank: usize },

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("no convergence after {iters} iterations (final residual {residual:e})")]
    NotConverged { iters: usize, residual: f64 },

    #[error("enumerating {count} supports exceeds the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("trace has {available} usable iterates, at least {required} are needed")]
    InsufficientTrace { available: usize, required: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
