use thiserror::Error;

/// Errors raised anywhere in the construction pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The family parameters do not describe an admissible surface.
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    /// The requested quantity does not exist for these parameters.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Moving-frame drift exceeded the hard cap before correction.
    #[error("integration quality: {0}")]
    IntegrationQuality(String),

    /// Mesh or report export failed.
    #[error("export error: {0}")]
    Export(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
