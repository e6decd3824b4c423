use thiserror::Error;

/// Errors raised by the library. Variants map onto the failure modes of the
/// individual operations; the CLI turns every variant into a validation exit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("spectrum not full: {0}")]
    NonFullSpectrum(String),

    #[error("Jordan structure is ambiguous at the requested tolerance: {0}")]
    AmbiguousJordan(String),

    #[error("no closed form available: {0}")]
    Unsupported(String),

    #[error("parameters violate the validity region: {0}")]
    Validity(String),

    #[error("importance weights look infinite-variance: {0}")]
    ProposalMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
