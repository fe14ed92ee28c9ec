//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`Result`]. The variants
//! partition failures by cause so callers can distinguish bad inputs (fix the
//! call) from numerical breakdowns (fix the data or the resolution).

/// Errors produced by group arithmetic, quadrature, transforms, and the
/// Laplacian builders.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument violates a documented precondition (non-finite value,
    /// wrong range, empty input, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two inputs that must agree in shape do not (point length vs. layout,
    /// sample count vs. grid size, ...).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A grid is too coarse to resolve the requested frequency band.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// The affinity kernel degenerated: a vertex degree is not strictly
    /// positive, so the normalized Laplacian does not exist.
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A mathematical function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn resolution(msg: impl Into<String>) -> Self {
        Error::Resolution(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
