use thiserror::Error;

/// Errors raised by objective evaluation, solvers and data generation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A modelling assumption (realizability, positive definiteness) does not hold.
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    /// The Hessian formula is ambiguous at this point (0^0 factor).
    #[error("Hessian is undefined at the optimum for q = {q}")]
    SingularPoint { q: u32 },

    #[error("Hessian is singular at this point")]
    SingularHessian,

    #[error("input {0} is outside the domain of the contraction map")]
    SingularInput(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
