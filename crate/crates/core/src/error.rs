use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("singular resolvent solve at shift s = {shift}")]
    SingularSolve { shift: Complex64 },

    #[error("truncation cap n_max = {cap} reached with tail mass {tail:e} (target {tail_eps:e})")]
    TruncationCap { cap: usize, tail: f64, tail_eps: f64 },

    #[error("degenerate null space: stationary state is not unique ({0})")]
    DegenerateNullSpace(String),

    #[error("U(1) symmetry violated: {0}")]
    SymmetryBroken(String),

    #[error("ladder populations are not normalizable: {0}")]
    NonNormalizable(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("manifest mismatch: {0}")]
    ManifestMismatch(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig { field: field.into(), reason: reason.into() }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. }
            | Error::DimensionMismatch { .. }
            | Error::ManifestMismatch(_)
            | Error::Json(_) => 2,
            Error::SingularSystem(_)
            | Error::SingularSolve { .. }
            | Error::TruncationCap { .. }
            | Error::DegenerateNullSpace(_)
            | Error::SymmetryBroken(_)
            | Error::NonNormalizable(_)
            | Error::NonFinite(_) => 3,
            Error::Io(_) => 1,
        }
    }
}
