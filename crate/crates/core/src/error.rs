use thiserror::Error;

/// Errors raised by kernel evaluation, quadrature, and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimated relative error {estimate:.3e} > tolerance {tol:.3e}")]
    QuadratureNonConvergence { estimate: f64, tol: f64 },

    #[error("inversion did not converge after {iterations} iterations (bracket width {width:.3e})")]
    InversionNonConvergence { iterations: usize, width: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("instability: |f| reached {max_abs:.3e}, more than 1e3 times the initial maximum {initial_max:.3e}")]
    Instability { max_abs: f64, initial_max: f64 },

    #[error("time step {dt:.3e} exceeds the stability bound {bound:.3e}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
