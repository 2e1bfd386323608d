use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported feature: {0}")]
    Unsupported(String),

    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),

    #[error("potential is singular at the origin: {0}")]
    Singularity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("step {step} rejected: {reason}")]
    StepRejected { step: usize, reason: String },

    /// Not a defect: the discrete solution concentrated or escaped the domain.
    #[error("blow-up reached at step {step}: {reason}")]
    BlowUp { step: usize, reason: String },

    #[error("particle collision at step {step}")]
    Collision { step: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
