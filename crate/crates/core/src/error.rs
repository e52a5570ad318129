use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("shape parameter must be positive and finite, got {0}")]
    InvalidShape(f64),
    #[error("derivative order {0} is not supported (maximum is 5)")]
    UnsupportedOrder(usize),
    #[error("unknown kernel family `{0}` (expected mq, imq or ga)")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizationError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("interpolation matrix is singular: zero pivot at row {pivot}")]
    Singular { pivot: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("unknown preset `{0}` (expected lax or sk)")]
    UnknownPreset(String),
    #[error("wave number k must be finite and nonzero, got {0}")]
    InvalidWaveNumber(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("state has length {actual}, operators expect {expected}")]
    SizeMismatch { expected: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("solution blew up (non-finite state) at step {step}, t = {time}")]
    BlowUp { step: usize, time: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}
