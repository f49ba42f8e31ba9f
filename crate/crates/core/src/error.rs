use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("unknown operator key `{key}` on site {site}")]
    UnknownOperator { site: String, key: String },

    #[error("operator `{0}` is not Hermitian")]
    NotHermitian(String),

    #[error("operator is not skew-Hermitian (deviation {0:e})")]
    NotSkewHermitian(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("mediator qubit {index} out of range (chain has {len} qubits)")]
    QubitOutOfRange { index: usize, len: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("locality violation: {0}")]
    Locality(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension too large: {0}")]
    DimensionTooLarge(String),

    #[error("state is not a product state (deviation {0:e})")]
    NotProduct(f64),

    #[error("measure mismatch: bound computed for {bound}, evaluating {measure}")]
    MeasureMismatch { bound: String, measure: String },
}
