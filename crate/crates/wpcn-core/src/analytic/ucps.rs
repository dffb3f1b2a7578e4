//! Uplink-channel port selection (UCPS): uplink outage by GLQ, its
//! step-function approximation, and the independent-port lower bound;
//! downlink closed form.
//!
//! UCPS activates the port with the largest uplink channel power β, which is
//! blind to the harvested energy α. The outer GLQ node carries α (Gamma(m, 1)
//! density), the inner one the per-block conditional CDF of the selected β:
//! an order-1 Marcum-Q power, since β given a block's common component is
//! noncentral-χ² with two degrees of freedom.

use super::{check_blocks, clamp_unit, ln_choose, product_tail};
use crate::channel::{BlockStructure, SystemConfig};
use crate::montecarlo::{Method, OutageEstimate};
use crate::specfun::{ln_gamma, marcum_q, QuadratureRule};
use crate::Result;

const SERIES_MAX_TERMS: usize = 40;
const SERIES_HEADROOM: f64 = 1e9;

/// UCPS downlink outage in closed form; channel-power selection is SIR-blind,
/// so the interference-limited single-port expression applies.
///
/// # Errors
///
/// Returns a domain error for `num_users` = 0 or a NaN/+inf target.
pub fn ucps_downlink_closed(num_users: usize, gamma_db: f64) -> Result<OutageEstimate> {
    super::deps::downlink_closed(num_users, gamma_db)
}

/// Exact UCPS uplink outage at SNR target `gamma_ul_db` by Gauss-Laguerre
/// quadrature over the harvested power (outer) and the block common
/// components (inner).
///
/// # Errors
///
/// Returns a configuration error for an invalid `cfg` or mismatched blocks,
/// and a domain error for a NaN or +inf target.
pub fn ucps_uplink_glq(
    cfg: &SystemConfig,
    blocks: &BlockStructure,
    gamma_ul_db: f64,
    rule: &QuadratureRule,
) -> Result<OutageEstimate> {
    cfg.validate()?;
    check_blocks(cfg, blocks)?;
    let gt = cfg.derived_params(gamma_ul_db)?.gamma_tilde;
    if gt == 0.0 {
        return OutageEstimate::analytic(0.0, Method::Glq);
    }
    let m = cfg.num_users;
    let mu2 = cfg.correlation;
    let xs = rule.nodes();
    let ws = rule.weights();
    let ln_gamma_m = ln_gamma(m as f64)?;
    let dens_out: Vec<f64> = xs
        .iter()
        .map(|&x| ((m as f64 - 1.0) * x.ln() - ln_gamma_m).exp())
        .collect();
    let offsets: Vec<f64> = xs
        .iter()
        .map(|&x| (2.0 * mu2 * x / (1.0 - mu2)).sqrt())
        .collect();
    let mut total = 0.0;
    for (k, (&u, &wk)) in xs.iter().zip(ws).enumerate() {
        let barg = (gt * (1.0 - mu2) / (2.0 * u)).sqrt();
        let mut cdf = Vec::with_capacity(xs.len());
        for &a in &offsets {
            cdf.push(1.0 - marcum_q(1, a, barg)?);
        }
        let mut prod = 1.0;
        for &l in blocks.sizes() {
            let le = l as i32;
            let block: f64 = xs
                .iter()
                .enumerate()
                .map(|(i, _)| ws[i] * cdf[i].powi(le))
                .sum();
            prod *= block;
        }
        total += wk * dens_out[k] * prod;
    }
    OutageEstimate::analytic(clamp_unit(total, "ucps_uplink_glq")?, Method::Glq)
}

/// UCPS uplink outage with the inner noncentral average replaced by its
/// step-function approximation: one exponential factor per block under the
/// outer GLQ average.
///
/// # Errors
///
/// As [`ucps_uplink_glq`].
pub fn ucps_uplink_sfa(
    cfg: &SystemConfig,
    blocks: &BlockStructure,
    gamma_ul_db: f64,
    rule: &QuadratureRule,
) -> Result<OutageEstimate> {
    cfg.validate()?;
    check_blocks(cfg, blocks)?;
    let gt = cfg.derived_params(gamma_ul_db)?.gamma_tilde;
    if gt == 0.0 {
        return OutageEstimate::analytic(0.0, Method::Sfa);
    }
    let m = cfg.num_users;
    let mu2 = cfg.correlation;
    let xs = rule.nodes();
    let ws = rule.weights();
    let ln_gamma_m = ln_gamma(m as f64)?;
    let mut total = 0.0;
    for (&u, &wk) in xs.iter().zip(ws) {
        let b = (gt * (1.0 - mu2) / (2.0 * u)).sqrt();
        let dens = ((m as f64 - 1.0) * u.ln() - ln_gamma_m).exp();
        let mut prod = 1.0;
        for &l in blocks.sizes() {
            let d = super::sfa::delta_step(b, l, 1);
            let thr = (1.0 - mu2) / (2.0 * mu2) * d * d;
            prod *= if thr.is_finite() { 1.0 - (-thr.max(0.0)).exp() } else { 1.0 };
        }
        total += wk * dens * prod;
    }
    OutageEstimate::analytic(clamp_unit(total, "ucps_uplink_sfa")?, Method::Sfa)
}

/// UCPS uplink outage lower bound: dropping the port correlation makes the
/// selected β the maximum of N independent exponentials, leaving an
/// alternating sum of product tails; evaluated in log-magnitude + sign form
/// with a GLQ fallback of the equivalent integral when the sum is too long
/// or too cancellation-heavy.
///
/// # Errors
///
/// Returns a configuration error for an invalid `cfg` and a domain error for
/// a NaN or +inf target.
pub fn ucps_uplink_lb(
    cfg: &SystemConfig,
    gamma_ul_db: f64,
    rule: &QuadratureRule,
) -> Result<OutageEstimate> {
    cfg.validate()?;
    let gh = cfg.derived_params(gamma_ul_db)?.gamma_hat;
    if gh == 0.0 {
        return OutageEstimate::analytic(0.0, Method::LowerBound);
    }
    let m = cfg.num_users;
    let count = cfg.num_ports;
    let value = match alternating_tail_sum(count, m, gh)? {
        Some(sum) => sum,
        None => {
            let ln_gamma_m = ln_gamma(m as f64)?;
            rule.nodes()
                .iter()
                .zip(rule.weights())
                .map(|(&x, &w)| {
                    let dens = ((m as f64 - 1.0) * x.ln() - ln_gamma_m).exp();
                    w * dens * (1.0 - (-gh / x).exp()).powi(count as i32)
                })
                .sum()
        }
    };
    OutageEstimate::analytic(clamp_unit(value, "ucps_uplink_lb")?, Method::LowerBound)
}

/// Σ_{b=0}^{count} (-1)^b C(count, b) Pr(U V > b gh) in log-magnitude + sign
/// form with Kahan compensation; `None` requests the quadrature fallback.
fn alternating_tail_sum(count: usize, m: usize, gh: f64) -> Result<Option<f64>> {
    if count > SERIES_MAX_TERMS {
        return Ok(None);
    }
    let mut sum = 1.0; // b = 0 term
    let mut comp = 0.0;
    let mut peak = 1.0_f64;
    for b in 1..=count {
        let tail = product_tail(m, b as f64 * gh)?;
        if tail == 0.0 {
            continue;
        }
        let magnitude = (ln_choose(count as u64, b as u64)? + tail.ln()).exp();
        let term = if b % 2 == 0 { magnitude } else { -magnitude };
        peak = peak.max(magnitude);
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    if peak > SERIES_HEADROOM * sum.abs().max(1e-300) {
        return Ok(None);
    }
    Ok(Some(sum))
}
