use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("direction is not a unit vector (|u| = {norm})")]
    NonUnitVector { norm: f64 },

    #[error("non-finite integrand value {value} at x = {x}")]
    NonFiniteIntegrand { x: f64, value: f64 },

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {value}, error {err})")]
    MaxSubdivisions { subdivisions: usize, value: f64, err: f64 },

    #[error("quadrature order limit exceeded: {0}")]
    OrderLimit(String),

    #[error("tolerance not met: requested {requested}, achievable {achieved}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    #[error("negative gamma value {value} at s = {s}")]
    NegativeGamma { s: f64, value: f64 },

    #[error("dyadic contributions do not decay; s^-1 gamma looks non-integrable ({0})")]
    DivergenceSuspected(String),

    #[error("monotone bound violated: R(t) = {r} exceeds its limit {limit}")]
    MonotoneBound { r: f64, limit: f64 },

    #[error("ill-conditioned limit fit: {0}")]
    IllConditioned(String),

    #[error("inconsistent third-term constant: formula {formula}, closed form {closed}")]
    InconsistentConstant { formula: f64, closed: f64 },

    #[error("uniform sampling failed: {0}")]
    SamplingFailure(String),

    #[error("invalid shape file: {0}")]
    ShapeFile(String),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteIntegrand { .. }
                | Error::MaxSubdivisions { .. }
                | Error::OrderLimit(_)
                | Error::ToleranceNotMet { .. }
                | Error::NegativeGamma { .. }
                | Error::DivergenceSuspected(_)
                | Error::MonotoneBound { .. }
                | Error::IllConditioned(_)
                | Error::InconsistentConstant { .. }
                | Error::SamplingFailure(_)
        )
    }
}
