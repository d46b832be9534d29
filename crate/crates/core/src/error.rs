use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the command-line front end to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters, missing files, malformed input.
    Usage,
    /// The mathematics rejects the request (rank, degeneracy, filtered spectrum).
    Domain,
    /// A numerical routine failed or produced a vanishing quantity.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian: max asymmetry {max_asymmetry:e} exceeds tolerance")]
    NonHermitian { max_asymmetry: f64 },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("every eigenvalue was removed by the condition-number filter (rank collapse)")]
    RankCollapse,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("requested {requested} directions but only {achievable} are available")]
    RankExceeded { requested: usize, achievable: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spectrum {max_eigenvalue} lies outside [0, 1); rescale the generator by at most {suggested_scale}")]
    SpectrumOutOfRange {
        max_eigenvalue: f64,
        suggested_scale: f64,
    },

    #[error("postselection branch vanishes (probability {probability:e})")]
    VanishingBranch { probability: f64 },

    #[error("fixed-point overflow: {0}")]
    Overflow(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::Parse { .. } | Error::Io(_) | Error::Json(_) => {
                ErrorKind::Usage
            }
            Error::VanishingBranch { .. } | Error::Numerical(_) | Error::Overflow(_) => {
                ErrorKind::Numerical
            }
            _ => ErrorKind::Domain,
        }
    }
}
