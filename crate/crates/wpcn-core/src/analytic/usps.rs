//! Uplink-SNR port selection (USPS): uplink outage by nested quadrature, its
//! step-function approximation, and the independent-port lower bound;
//! downlink closed form.
//!
//! USPS activates the port maximizing the product α β, so the conditional
//! per-port survival couples both block common components: an integral of an
//! order-m Marcum-Q against the Rice density of the uplink gain. The outer
//! 2D Gauss-Laguerre tensor grid carries the two common components; the inner
//! integral runs over the Rice-distributed envelope by adaptive Simpson after
//! the variance-stabilizing substitution v = √(β/2).

use rayon::prelude::*;

use super::{check_blocks, clamp_unit, product_tail, SQRT_2PI};
use crate::channel::{BlockStructure, SystemConfig};
use crate::montecarlo::{Method, OutageEstimate};
use crate::specfun::{adaptive_simpson, bessel_i_scaled, ln_gamma, marcum_q, QuadratureRule};
use crate::Result;

/// Tensor-grid pairs lighter than this cannot move the 2D sums.
const PAIR_WEIGHT_CUTOFF: f64 = 1e-22;
/// Relative tolerance of the inner adaptive integral.
const INNER_REL_TOL: f64 = 1e-9;

/// USPS downlink outage in closed form; uplink-driven selection is SIR-blind,
/// so the interference-limited single-port expression applies.
///
/// # Errors
///
/// Returns a domain error for `num_users` = 0 or a NaN/+inf target.
pub fn usps_downlink_closed(num_users: usize, gamma_db: f64) -> Result<OutageEstimate> {
    super::deps::downlink_closed(num_users, gamma_db)
}

/// Conditional single-port survival Pr(α β ≥ gt | r, r̃): adaptive Simpson
/// over v = √(β/2), with the Rice density written around the exponentially
/// scaled I₀ so large common components stay in range.
fn usps_inner(gt: f64, m: usize, mu2: f64, r: f64, rt: f64) -> Result<f64> {
    let c = mu2 / (1.0 - mu2);
    let a = (2.0 * c * r).sqrt();
    let w = (c * rt).sqrt();
    let s = (0.5 * gt).sqrt();
    let f = |v: f64| -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let b = s / v;
        if !b.is_finite() {
            return 0.0;
        }
        // Arguments are validated above; the tail of a finite overflow-range
        // b is 0 by the Marcum guard, so this cannot actually error.
        let q = marcum_q(m as u32, a, b).unwrap_or(0.0);
        let bess = bessel_i_scaled(0, 2.0 * w * v).unwrap_or(0.0);
        2.0 * v * q * (-(v - w) * (v - w)).exp() * bess
    };
    let lo = (w - 9.0).max(0.0);
    let hi = w + 10.0;
    Ok(adaptive_simpson(f, lo, hi, INNER_REL_TOL)?.clamp(0.0, 1.0))
}

/// Exact USPS uplink outage at SNR target `gamma_ul_db` by nested quadrature:
/// a 2D Gauss-Laguerre tensor grid over the block common components with an
/// adaptive inner integral per surviving node pair.
///
/// The inner survival does not depend on the block size, so the pair matrix
/// is evaluated once (in parallel) and reused across blocks.
///
/// # Errors
///
/// Returns a configuration error for an invalid `cfg` or mismatched blocks,
/// and a domain error for a NaN or +inf target.
pub fn usps_uplink_nested(
    cfg: &SystemConfig,
    blocks: &BlockStructure,
    gamma_ul_db: f64,
    rule: &QuadratureRule,
) -> Result<OutageEstimate> {
    cfg.validate()?;
    check_blocks(cfg, blocks)?;
    let gt = cfg.derived_params(gamma_ul_db)?.gamma_tilde;
    if gt == 0.0 {
        return OutageEstimate::analytic(0.0, Method::Nested);
    }
    let m = cfg.num_users;
    let mu2 = cfg.correlation;
    let xs = rule.nodes();
    let ws = rule.weights();
    let ln_gamma_m = ln_gamma(m as f64)?;
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for (i, &r) in xs.iter().enumerate() {
        let dens = ((m as f64 - 1.0) * r.ln() - ln_gamma_m).exp();
        for k in 0..xs.len() {
            let wgt = ws[i] * ws[k];
            if wgt < PAIR_WEIGHT_CUTOFF {
                continue;
            }
            pairs.push((i, k, wgt * dens));
        }
    }
    let survivals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, k, _)| usps_inner(gt, m, mu2, xs[i], xs[k]))
        .collect::<Result<_>>()?;
    let mut total = 1.0;
    for &l in blocks.sizes() {
        let le = l as i32;
        let acc: f64 = pairs
            .iter()
            .zip(&survivals)
            .map(|(&(_, _, wd), &inner)| wd * (1.0 - inner).powi(le))
            .sum();
        total *= acc;
    }
    OutageEstimate::analytic(clamp_unit(total, "usps_uplink_nested")?, Method::Nested)
}

/// USPS uplink outage with the coupled selection term replaced by its
/// step-function approximation: one exponential factor per node and block
/// over a single Gauss-Laguerre grid.
///
/// # Errors
///
/// As [`usps_uplink_nested`].
pub fn usps_uplink_sfa(
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
    let c = mu2 / (1.0 - mu2);
    let xs = rule.nodes();
    let ws = rule.weights();
    let ln_gamma_m = ln_gamma(m as f64)?;
    let dens: Vec<f64> = xs
        .iter()
        .map(|&x| ((m as f64 - 1.0) * x.ln() - ln_gamma_m).exp())
        .collect();
    let mut total = 1.0;
    for &l in blocks.sizes() {
        let lm1 = l as f64 - 1.0;
        let mut block = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let a = (2.0 * c * x).sqrt();
            // Stationarity abscissa of the coupled survival in the envelope
            // variable, then the tangent-line step correction.
            let d = 2.0 * gt.sqrt() / (a + (a * a + 4.0 * m as f64 - 2.0).sqrt());
            let t1n = lm1 / SQRT_2PI * d + 0.5;
            let t1d = lm1 / (2.0 * SQRT_2PI) + 0.5 / d - d;
            let dtil = (1.0 - mu2) / (2.0 * mu2) * (d + t1n / t1d) * (d + t1n / t1d);
            block += ws[i] * dens[i] * (-dtil.max(0.0)).exp();
        }
        total *= 1.0 - block;
    }
    OutageEstimate::analytic(clamp_unit(total, "usps_uplink_sfa")?, Method::Sfa)
}

/// USPS uplink outage lower bound: with the port correlation dropped, the
/// selected product α β is the maximum of N independent copies, so the outage
/// is the single-port outage raised to the N-th power.
///
/// # Errors
///
/// Returns a configuration error for an invalid `cfg` and a domain error for
/// a NaN or +inf target.
pub fn usps_uplink_lb(cfg: &SystemConfig, gamma_ul_db: f64) -> Result<OutageEstimate> {
    cfg.validate()?;
    let gh = cfg.derived_params(gamma_ul_db)?.gamma_hat;
    let single = 1.0 - product_tail(cfg.num_users, gh)?;
    let value = single.powi(cfg.num_ports as i32);
    OutageEstimate::analytic(clamp_unit(value, "usps_uplink_lb")?, Method::LowerBound)
}
