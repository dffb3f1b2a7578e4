//! Crate-wide error type.
//!
//! Two failure classes exist: domain errors (an argument outside a kernel's
//! mathematical domain, e.g. a negative Bessel-K argument) and configuration
//! errors (an invalid system parameter or quadrature order). Silent NaN
//! propagation is forbidden throughout the crate; kernels either return a
//! finite value or one of these errors.

use thiserror::Error;

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by all modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A system or solver parameter violates its documented constraints.
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Shorthand constructor for [`Error::Domain`].
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Shorthand constructor for [`Error::Config`].
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
