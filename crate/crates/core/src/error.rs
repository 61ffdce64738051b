use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unsupported algebra dimension m={0}, expected 2..=4")]
    UnsupportedDimension(usize),
    #[error("unsupported kernel order K={order} for even m={m}: the radial ansatz hits the logarithmic branch")]
    UnsupportedOrder { m: usize, order: usize },
    #[error("kernel evaluated at a singular point (|x| < {0:e})")]
    SingularPoint(f64),
    #[error("density length {0} does not match node count {1}")]
    LengthMismatch(usize, usize),
    #[error("multi-index {0} out of range for order k={1}")]
    IndexOutOfRange(String, usize),
    #[error("Lipschitz data failed validation: {0}")]
    ValidationFailed(String),
    #[error("target point too close to the surface (dist={dist:e}, advised minimum {min:e})")]
    TooCloseToSurface { dist: f64, min: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
