use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli index {0} (expected 0..=3)")]
    InvalidIndex(u8),

    #[error("unsupported system size {0} (expected 2 or 3 qubits)")]
    UnsupportedSize(usize),

    #[error("system size mismatch: expected {expected} qubits, found {found}")]
    WrongSystemSize { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (found {0})")]
    TraceNotUnit(f64),

    #[error("correlation tensor identity entry must be 1 (found {0})")]
    IdentityEntry(f64),

    #[error("coupling at the all-zero index must vanish (found {0})")]
    NonzeroIdentityCoupling(f64),

    #[error("coupling has a 3-body term at index {0:?}")]
    ThreeBodyTerm(Vec<u8>),

    #[error("malformed qubit pair `{0}`")]
    MalformedPair(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("model has no closed form: {0}")]
    NoClosedForm(String),

    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),

    #[error("state is not positive semidefinite (smallest margin {0:e})")]
    NotPositive(f64),

    #[error("value {value} outside the valid domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("expected {expected} parameters, got {found}")]
    ParameterCount { expected: usize, found: usize },

    #[error("nullspace does not contain the identity direction")]
    MissingIdentity,

    #[error("explicit inequality disagrees with power-trace evaluation: {0}")]
    InequalityMismatch(String),

    #[error("leading cubic coefficient is zero")]
    DegenerateCubic,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
