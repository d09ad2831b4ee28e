use thiserror::Error;

/// Errors raised by the divergence, sampling and planning routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument lies outside the domain of the operation.
    #[error("{name} = {value} is out of domain: {bound}")]
    Domain {
        name: &'static str,
        value: f64,
        bound: String,
    },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error(
        "matrix is not symmetric: entry ({row}, {col}) differs from its transpose by {diff:e}"
    )]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid edge ({u}, {v}) for dimension {dim}: {reason}")]
    InvalidEdge {
        u: usize,
        v: usize,
        dim: usize,
        reason: &'static str,
    },

    #[error("dimension {dim} exceeds the dense-matrix cap of {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("n too small relative to p: degrees of freedom f = n + 1 - p = {f} must be >= 1")]
    TooFewObservations { f: i64 },

    #[error("{0}")]
    InvalidInput(String),

    #[error("failed to serialize output: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "rho",
            value: rho,
            bound: "|rho| must be < 1".into(),
        })
    }
}
