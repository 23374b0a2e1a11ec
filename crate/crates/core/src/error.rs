use thiserror::Error;

use crate::report::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("operator is not an effect (spectrum outside [0, 1] by {defect:.3e})")]
    NotAnEffect { defect: f64 },
    #[error("c*c does not reproduce the given operator (defect {defect:.3e})")]
    Inconsistent { defect: f64 },
    #[error("vectors are not orthonormal (Gram defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid stochastic matrix: {0}")]
    InvalidStochasticMatrix(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(ValidationReport),
    #[error("invalid channel: {0}")]
    InvalidChannel(ValidationReport),
    #[error("invalid instrument: {0}")]
    InvalidInstrument(ValidationReport),
    #[error("instrument does not implement the claimed observable (defect {defect:.3e})")]
    NotCompatible { defect: f64 },
    #[error("compatibility could not be decided within the iteration budget")]
    Undecided,
    #[error("constructed degrading channel failed verification (residual {residual:.3e})")]
    VerificationFailed { residual: f64 },
    #[error("Bloch vector is too short to define an axis")]
    DegenerateAxis,
    #[error("Bloch vector norm {0} exceeds 1")]
    InvalidBlochVector(f64),
    #[error("weight {0} outside [1/2, 1]")]
    InvalidWeight(f64),
    #[error("no intermediate weight: target {mu} exceeds {lambda}")]
    NoSolution { lambda: f64, mu: f64 },
    #[error("weight 1/2 cannot be degraded to {mu}")]
    SingularSharpness { mu: f64 },
}
