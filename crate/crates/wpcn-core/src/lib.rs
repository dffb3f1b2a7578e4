//! Numerical laboratory for outage analysis of a fluid-antenna multiple-access
//! wireless-powered communication network (FAMA-WPCN).
//!
//! A hybrid access point with M antennas serves M users. Each user carries a
//! fluid antenna whose N ports span an aperture of W wavelengths; spatial
//! correlation across ports follows the Jakes model and is approximated by a
//! block-correlation structure of B constant-correlation blocks. Users harvest
//! downlink energy (power-splitting ratio ρ, conversion efficiency η) during a
//! fraction t₁ of each period and spend it on uplink transmission during t₂.
//!
//! The crate provides, for four port-selection strategies (best downlink SIR,
//! best harvested energy, best uplink channel, best uplink SNR):
//!
//! - closed-form, Gauss-Laguerre, SFA-approximate, and lower-bound evaluators
//!   of the downlink and uplink outage probabilities ([`analytic`]),
//! - a seeded, reproducible Monte Carlo simulator of the same quantities
//!   ([`montecarlo`]),
//! - the underlying channel model and block-structure derivation ([`channel`]),
//! - the selection rules and the fixed-position selection-combining baseline
//!   ([`strategy`]),
//! - self-contained special-function kernels (Marcum-Q, modified Bessel,
//!   incomplete gamma, Gauss-Laguerre rules) that everything above rests on
//!   ([`specfun`]).
//!
//! All analytic evaluators return probabilities in [0, 1] and are pure
//! functions; the Monte Carlo engine is deterministic for a fixed seed
//! regardless of worker count.

mod error;
pub mod analytic;
pub mod channel;
pub mod montecarlo;
pub mod specfun;
pub mod strategy;

pub use error::{Error, Result};
