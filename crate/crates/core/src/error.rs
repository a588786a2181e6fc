use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TargetError {
    #[error("invalid target parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MatfunError {
    /// A spectral functional whose image must be positive was not at some eigenvalue.
    #[error("non-positive spectrum: eigenvalue {eigenvalue} maps to {image}")]
    NonPositiveSpectrum { eigenvalue: f64, image: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid functional parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProposalError {
    /// The proposal covariance `S S^T` is not positive definite at this point.
    #[error("proposal scale is degenerate: {0}")]
    ScaleNotPositive(String),
    #[error("invalid proposal parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

impl From<MatfunError> for ProposalError {
    fn from(err: MatfunError) -> Self {
        match err {
            MatfunError::NonPositiveSpectrum { .. } => Self::ScaleNotPositive(err.to_string()),
            MatfunError::DimensionMismatch { expected, got } => {
                Self::DimensionMismatch { expected, got }
            }
            MatfunError::InvalidParameter(msg) => Self::InvalidParameter(msg),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SamplerError {
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: ProposalError,
    },
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Target(#[from] TargetError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("trace too short: need at least {needed} post burn-in entries, have {have}")]
    EmptyTrace { needed: usize, have: usize },
    #[error("negative Monte-Carlo estimate {mean} (standard error {std_error})")]
    NegativeEstimate { mean: f64, std_error: f64 },
    #[error("asymptotic constant must be positive for this operation, got {0}")]
    DegenerateK(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
