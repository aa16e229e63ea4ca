use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension {dim} exceeds the cap of {cap}")]
    Size { dim: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver did not converge (residual {residual:.3e})")]
    Convergence { residual: f64 },

    #[error("not a valid state: {0}")]
    InvalidState(String),

    #[error("not completely positive and trace preserving: {what} (residual {residual:.3e})")]
    NotCptp { what: String, residual: f64 },

    #[error("not a unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("effect operator outside [0, I]: eigenvalues span [{min:.3e}, {max:.3e}]")]
    Effect { min: f64, max: f64 },

    #[error("SDP solver failed: {0}")]
    Solver(String),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
