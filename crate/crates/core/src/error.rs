use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid register shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("operator is not a projector (deviation {0:e})")]
    NotProjector(f64),

    #[error("operator is not between 0 and I (eigenvalue {0})")]
    NotContraction(f64),

    #[error("not a density operator: {0}")]
    InvalidDensity(String),

    #[error("register {index} out of range for a system of {count} registers")]
    RegisterOutOfRange { index: usize, count: usize },

    #[error("register {0} appears more than once among gate targets and controls")]
    OverlappingRegisters(usize),

    #[error("mapping is not a bijection: {0}")]
    NotBijective(String),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubset(String),

    #[error("requested branch has probability {0:e}, below the collapse threshold")]
    ZeroProbabilityBranch(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
