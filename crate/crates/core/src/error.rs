use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("cannot parse Pauli string {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("invalid size {size} for {what}: must be at least {min}")]
    InvalidSize {
        what: &'static str,
        size: usize,
        min: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid syndrome: {0}")]
    InvalidState(String),

    #[error("invalid logical operator: {0}")]
    InvalidLogical(String),

    #[error("operator {op} is not Hermitian")]
    NotHermitian { op: String },

    #[error("operator {op} does not act on a single site")]
    NotSingleSite { op: String },

    #[error("{what} of size {size} exceeds the supported maximum {max}{hint}")]
    Capacity {
        what: &'static str,
        size: usize,
        max: usize,
        hint: &'static str,
    },

    #[error("coupling {coupling} is not supported for the {model} model")]
    UnsupportedCoupling {
        coupling: &'static str,
        model: &'static str,
    },

    #[error("spectral function violates the KMS ratio at omega = {omega}: h(-omega) = {minus}, expected {expected}")]
    KmsViolation {
        omega: f64,
        minus: f64,
        expected: f64,
    },

    #[error("Bohr frequency {omega} has no rate in the spectral function")]
    MissingFrequency { omega: f64 },

    #[error("exponential propagation did not converge: {0}")]
    NonConvergence(String),

    #[error("invalid syndrome function: {0}")]
    InvalidFunction(String),

    #[error("negative rate {rate} in rate table")]
    NegativeRate { rate: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
