use thiserror::Error;

use crate::problem::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem:\n{0}")]
    Validation(ValidationReport),

    #[error("unknown preset `{0}` (expected one of cantilever_free, cantilever_spring, cantilever_dampers, mast_constant, test_NE1)")]
    UnknownPreset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("query outside the domain: {0}")]
    OutOfDomain(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e}) while factoring the {context} matrix")]
    NotPositiveDefinite {
        context: &'static str,
        pivot: usize,
        value: f64,
    },

    #[error("no admissible penalty parameter: {0}")]
    NoAdmissibleLambda(String),

    #[error("penalty parameter {lambda} outside the admissible window (0, {lambda_max})")]
    LambdaOutOfWindow { lambda: f64, lambda_max: f64 },

    #[error("boundary velocity condition fails at t = {time}: u_xt(l,t)^2 + u_t(l,t)^2 = 0")]
    VelocityConditionFails { time: f64 },

    #[error("energy identity only holds for the unforced system; boundary forcing is nonzero")]
    ForcedSystem,

    #[error("problem has no attached exact solution")]
    NoExactSolution,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) => 1,
            Error::UnknownPreset(_) | Error::InvalidArgument(_) => 3,
            _ => 2,
        }
    }
}
