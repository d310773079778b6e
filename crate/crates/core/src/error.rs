use thiserror::Error;

/// Errors raised by the numerical layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms (partial sum {partial_sum:e}, last term {last_term:e})")]
    SeriesNonConvergence {
        terms: usize,
        partial_sum: f64,
        last_term: f64,
    },

    #[error("quadrature did not converge: best estimate {value:e} with error estimate {error_estimate:e}")]
    QuadratureNonConvergence { value: f64, error_estimate: f64 },

    #[error("normalization series diverges: {0}")]
    Divergent(String),

    #[error("quantity is undefined at the origin z = 0")]
    UndefinedAtOrigin,

    #[error("incompatible states: {0}")]
    Incompatible(String),

    #[error("root finder did not converge for degree {degree} (condition estimate {condition:e})")]
    RootNonConvergence { degree: usize, condition: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
