use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parameter outside domain: {0}")]
    ParameterDomain(String),
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {value:e}, error {error_estimate:e})")]
    QuadratureNotConverged {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("coefficient vanishes at r = {r:e}")]
    SingularCoefficient { r: f64 },
    #[error("solution diverged at r = {r:e} (|phi| = {value:e})")]
    Divergence { r: f64, value: f64 },
    #[error("step size underflow at r = {r:e}")]
    StepUnderflow { r: f64 },
    #[error("eigenvalue search failed: {0}")]
    SearchFailure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("gauge is singular at the origin")]
    SingularPoint,
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("resolution insufficient: {0}")]
    Resolution(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
