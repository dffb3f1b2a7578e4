//! Analytical outage-probability evaluators for all port-selection
//! strategies, in closed form where one exists and otherwise by
//! Gauss-Laguerre quadrature (GLQ), step-function approximation (SFA), or
//! explicit lower bounds.
//!
//! Conventions shared by every evaluator:
//!
//! - Downlink thresholds are SIR targets γ in dB, uplink thresholds are SNR
//!   targets γ_U in dB; `-inf` dB means "no requirement" and yields outage 0.
//! - Normalized variables: per-port total downlink power α and uplink gain β
//!   are scaled by (1 - μ²)/2 so that α ~ Gamma(M, 1) and β ~ Exp(1); the
//!   uplink outage event α β γ-scaled < γ̃ then reduces to thresholds on these
//!   unit-scale variables ([`crate::channel::SystemConfig::derived_params`]).
//! - Block correlation enters through the block sizes L_b: conditioned on the
//!   block's common component, the L_b ports of a block fade independently,
//!   so per-block selection terms appear as an inner CDF raised to the L_b-th
//!   power and the N-port result is a product over blocks.
//! - Every evaluator returns a probability in [0, 1] wrapped in an
//!   [`OutageEstimate`] whose method tag records how it was computed.
//!
//! The SFA replaces the inner CDF power [1 - Q_p(a, b)]^L by a unit step at
//! the abscissa where the power transitions, computed by [`sfa_threshold`];
//! it is accurate when b (equivalently the correlation μ²) is large.

mod deps;
mod dsps;
mod sfa;
mod ucps;
mod usps;

pub use deps::{
    deps_downlink_closed, deps_uplink_glq, deps_uplink_lb, deps_uplink_lb_at,
    deps_uplink_lb_closed, deps_uplink_sfa,
};
pub use dsps::{dsps_downlink_glq, dsps_downlink_sfa, dsps_downlink_sfa2, dsps_uplink_closed};
pub use sfa::{sfa_threshold, SfaForm, SfaThreshold};
pub use ucps::{ucps_downlink_closed, ucps_uplink_glq, ucps_uplink_lb, ucps_uplink_sfa};
pub use usps::{usps_downlink_closed, usps_uplink_lb, usps_uplink_nested, usps_uplink_sfa};

use crate::channel::{db_to_linear, BlockStructure, SystemConfig};
use crate::specfun::{bessel_k, ln_gamma};
use crate::{Error, Result};

pub(crate) const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Pr(U V > t) for U ~ Gamma(m, 1) and V ~ Exp(1):
/// 2 t^{m/2} K_m(2√t) / Γ(m), with value 1 at t = 0.
///
/// This is the survival function of the product of a user's normalized total
/// downlink power and uplink gain at a single port, the kernel of every
/// uplink closed form.
///
/// # Errors
///
/// Returns a domain error for m = 0 or t < 0, NaN, or infinite.
pub fn product_tail(m: usize, t: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("product_tail requires m >= 1".to_string()));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!(
            "product_tail requires finite t >= 0, got {t}"
        )));
    }
    let z = 2.0 * t.sqrt();
    // Below this point the tail is 1 to within f64 rounding, and t^{m/2}
    // against K_m(2√t) would overflow long before reaching it.
    if z < 1e-8 {
        return Ok(1.0);
    }
    let mf = m as f64;
    let value = 2.0 / ln_gamma(mf)?.exp() * t.powf(0.5 * mf) * bessel_k(m as u32, z)?;
    Ok(value.clamp(0.0, 1.0))
}

/// ln C(n, k) via the log-gamma function.
pub(crate) fn ln_choose(n: u64, k: u64) -> Result<f64> {
    debug_assert!(k <= n);
    Ok(ln_gamma(n as f64 + 1.0)? - ln_gamma(k as f64 + 1.0)? - ln_gamma((n - k) as f64 + 1.0)?)
}

/// Validates a finished probability and absorbs quadrature rounding just
/// outside [0, 1]; anything further out is reported as a defect.
pub(crate) fn clamp_unit(value: f64, what: &str) -> Result<f64> {
    if !value.is_finite() || !(-1e-3..=1.0 + 1e-3).contains(&value) {
        return Err(Error::domain(format!(
            "{what} produced {value}, outside [0, 1]"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Shared front-door checks for downlink evaluators: valid configuration,
/// blocks spanning the configured ports, and a usable threshold. Returns the
/// linear SIR target (0 for -inf dB).
pub(crate) fn downlink_gamma(
    cfg: &SystemConfig,
    blocks: Option<&BlockStructure>,
    gamma_db: f64,
) -> Result<f64> {
    cfg.validate()?;
    if let Some(b) = blocks {
        check_blocks(cfg, b)?;
    }
    if gamma_db.is_nan() || gamma_db == f64::INFINITY {
        return Err(Error::domain(format!(
            "SIR target must be a real dB value or -inf, got {gamma_db}"
        )));
    }
    Ok(db_to_linear(gamma_db))
}

pub(crate) fn check_blocks(cfg: &SystemConfig, blocks: &BlockStructure) -> Result<()> {
    if blocks.total_ports() != cfg.num_ports {
        return Err(Error::config(format!(
            "block structure spans {} ports but the configuration has {}",
            blocks.total_ports(),
            cfg.num_ports
        )));
    }
    Ok(())
}
