use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sequence is not a frame (lower bound {lower:e}, upper bound {upper:e})")]
    NotAFrame { lower: f64, upper: f64 },
    #[error("frames are not woven: {0}")]
    NotWoven(String),
    #[error("frame is not Parseval (bounds {lower}, {upper})")]
    NotParseval { lower: f64, upper: f64 },
    #[error("not a dual frame: {0}")]
    NotDual(String),
    #[error("frame has no redundant elements (excess 0)")]
    NoRedundancy,
    #[error("scalar at index {index} is zero")]
    ZeroScalar { index: usize },
    #[error("perturbation is not admissible (residual {residual:e})")]
    InadmissiblePerturbation { residual: f64 },
    #[error("enumeration of {count} partitions exceeds the limit of {limit}")]
    TooLarge { count: u128, limit: u64 },
}

impl Error {
    /// True for failures of the numerical kernel rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}
