use std::fmt;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("operation not supported for model {model}: {what}")]
    UnsupportedModel { model: &'static str, what: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("simulation budget of {max_points} points exhausted in replication {replication}")]
    SimulationBudget { replication: usize, max_points: usize },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error bound {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("spectral measure is degenerate at zero displacement")]
    DegenerateSpectrum,

    #[error("angle {theta} lies on an atom of the spectral measure")]
    AtomLocation { theta: f64 },

    #[error("joint exceedance count is zero; tail independence makes the estimate infinite")]
    Independence,

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("design matrix is rank deficient: {0}")]
    DesignDeficiency(String),

    #[error("least-squares solution a = {a:?} is infeasible for the general normal model")]
    InfeasibleEstimate { a: [f64; 3] },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl fmt::Display) -> Self {
        Error::Domain(msg.to_string())
    }

    pub(crate) fn data(msg: impl fmt::Display) -> Self {
        Error::Data(msg.to_string())
    }

    pub(crate) fn config(line: usize, msg: impl fmt::Display) -> Self {
        Error::Config {
            line,
            message: msg.to_string(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::UnsupportedModel { .. } => 2,
            Error::Data(_) | Error::Io(_) | Error::DimensionMismatch { .. } | Error::Domain(_) => 3,
            _ => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
