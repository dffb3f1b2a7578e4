//! Command-line front end for the outage laboratory.
//!
//! A [`scenario::Scenario`] names a sweep (threshold, user count, aperture,
//! port count, or transmit power), the fixed system around it, and the
//! strategy/link/method combinations to tabulate. [`run`] evaluates it into
//! ordered rows and renders CSV (the artifact of record) and an optional
//! self-contained SVG; [`validate`] cross-checks analytic evaluators against
//! the Monte Carlo engine and lower bounds against their estimates.
//!
//! Everything is deterministic for a fixed seed: the Monte Carlo engine
//! chunks work on fixed counter-mode streams, so output bytes do not depend
//! on worker count.

pub mod diagnostic;
pub mod run;
pub mod scenario;
pub mod svg;
pub mod validate;

/// Failure classes of a CLI operation, each with a stable process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unusable scenario, token, or flag value (exit code 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// A validation run found a violation (exit code 3).
    #[error("validation failure: {0}")]
    Validation(String),
    /// The file system refused a read or write (exit code 4).
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code for this failure class.
    #[must_use]
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<wpcn_core::Error> for CliError {
    fn from(e: wpcn_core::Error) -> Self {
        // Domain errors reaching the CLI mean an input drove an evaluator out
        // of its domain, which is a configuration problem from the outside.
        CliError::Config(e.to_string())
    }
}
