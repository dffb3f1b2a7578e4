//! Downlink-SIR port selection (DSPS): exact downlink outage by nested GLQ,
//! two step-function approximations, and the uplink closed form.
//!
//! Conditioned on a block's common components (r for the desired user, r̃ for
//! the interferers), the per-port SIR outage probability is a function
//! G(γ; 2r, 2r̃) built from a Marcum-Q tail minus a finite double sum of
//! scaled Bessel terms. Selecting the best of the L_b conditionally
//! independent ports in a block raises G to the L_b-th power; averaging the
//! product over blocks against the Gamma-distributed common components gives
//! the exact outage. The SFA variants collapse the inner average (and, in the
//! doubled variant, the outer tail as well) to incomplete-gamma terms.

use super::{clamp_unit, downlink_gamma, product_tail, SQRT_2PI};
use crate::channel::{BlockStructure, SystemConfig};
use crate::montecarlo::{Method, OutageEstimate};
use crate::specfun::{gamma_q, ln_gamma, log_bessel_i, marcum_q, QuadratureRule};
use crate::Result;

/// Weights below this never influence the 2D sums at f64 precision.
const SINGLE_WEIGHT_CUTOFF: f64 = 1e-130;
const PAIR_WEIGHT_CUTOFF: f64 = 1e-24;

fn pochhammer(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (a + k as f64))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Conditional per-port SIR outage G(γ; r2, r̃2) for one user among m, given
/// the doubled common components r2 = 2r and r̃2 = 2r̃ of the desired and
/// interfering gains: a Marcum-Q tail minus a finite double sum accumulated
/// in log space around scaled Bessel factors.
fn g_fun(gamma: f64, r2: f64, rt2: f64, m: usize, mu2: f64) -> Result<f64> {
    let gp1 = gamma + 1.0;
    let c = mu2 / ((1.0 - mu2) * gp1);
    let order = (m - 1) as u32;
    let q = marcum_q(order, (c * gamma * rt2).sqrt(), (c * r2).sqrt())?;
    let lpref = -(m as f64 - 1.0) * gp1.ln() - 0.5 * c * (gamma * rt2 + r2);
    let w = c * (gamma * r2 * rt2).sqrt();
    let mut s = 0.0;
    for l in 0..=(m - 2) {
        for j in 0..=(m - 2 - l) {
            let coef = pochhammer((m - (j + l) - 1) as f64, j) / factorial(j);
            if coef == 0.0 {
                continue;
            }
            let lt = 0.5 * ((j + l) as f64) * (r2 / rt2).ln()
                + (l as f64) * gp1.ln()
                + 0.5 * (j as f64 - l as f64) * gamma.ln()
                + log_bessel_i((j + l) as u32, w)?;
            s += coef * (lpref + lt).exp();
        }
    }
    Ok(q - s)
}

/// Exact DSPS downlink outage probability at SIR target `gamma_db`, by
/// tensor-product Gauss-Laguerre quadrature over the two common components
/// of each correlation block.
///
/// # Errors
///
/// Returns a configuration error for an invalid `cfg` or mismatched blocks,
/// and a domain error for a NaN or +inf target.
pub fn dsps_downlink_glq(
    cfg: &SystemConfig,
    blocks: &BlockStructure,
    gamma_db: f64,
    rule: &QuadratureRule,
) -> Result<OutageEstimate> {
    let gamma = downlink_gamma(cfg, Some(blocks), gamma_db)?;
    if gamma == 0.0 {
        return OutageEstimate::analytic(0.0, Method::Glq);
    }
    let m = cfg.num_users;
    let mu2 = cfg.correlation;
    let xs = rule.nodes();
    let ws = rule.weights();
    let ln_gamma_m1 = ln_gamma(m as f64 - 1.0)?;
    // The conditional CDF G and the pair weight are block-independent;
    // evaluate the surviving (r, r̃) pairs once and reuse them per block.
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (i, &r) in xs.iter().enumerate() {
        if ws[i] < SINGLE_WEIGHT_CUTOFF {
            continue;
        }
        for (k, &rt) in xs.iter().enumerate() {
            let wgt = ws[i] * ws[k];
            if wgt < PAIR_WEIGHT_CUTOFF {
                continue;
            }
            let dens = ((m as f64 - 2.0) * rt.ln() - ln_gamma_m1).exp();
            let g = g_fun(gamma, 2.0 * r, 2.0 * rt, m, mu2)?.clamp(0.0, 1.0);
            pairs.push((wgt * dens, g));
        }
    }
    let mut total = 1.0;
    for &l in blocks.sizes() {
        let acc: f64 = pairs.iter().map(|&(w, g)| w * g.powi(l as i32)).sum();
        total *= acc;
    }
    OutageEstimate::analytic(clamp_unit(total, "dsps_downlink_glq")?, Method::Glq)
}

/// DSPS downlink outage with the inner conditional CDF replaced by its
/// step-function approximation, leaving a single Marcum-Q per node pair.
///
/// Accurate for γ a few dB above 0; below that the step abscissa drifts into
/// the bulk of the conditional density and the approximation overshoots.
///
/// # Errors
///
/// As [`dsps_downlink_glq`].
pub fn dsps_downlink_sfa(
    cfg: &SystemConfig,
    blocks: &BlockStructure,
    gamma_db: f64,
    rule: &QuadratureRule,
) -> Result<OutageEstimate> {
    let gamma = downlink_gamma(cfg, Some(blocks), gamma_db)?;
    if gamma == 0.0 {
        return OutageEstimate::analytic(0.0, Method::Sfa);
    }
    let m = cfg.num_users;
    let mu2 = cfg.correlation;
    let xs = rule.nodes();
    let ws = rule.weights();
    let ln_gamma_m1 = ln_gamma(m as f64 - 1.0)?;
    let order = (m - 1) as u32;
    // Step abscissa from the desired user's component r, Marcum offset from
    // the interferers' component x; both matrices are block-independent.
    let n = xs.len();
    let mut q_matrix = vec![0.0f64; n * n];
    for (i, &r) in xs.iter().enumerate() {
        let half = mu2 * r / (2.0 * (1.0 - mu2) * gamma);
        let dd = half.sqrt() + (half + 0.5 / gamma).sqrt();
        for (k, &x) in xs.iter().enumerate() {
            let a = (2.0 * mu2 * x / (1.0 - mu2)).sqrt();
            q_matrix[i * n + k] = marcum_q(order, a, dd)?;
        }
    }
    let dens: Vec<f64> = xs
        .iter()
        .map(|&x| ((m as f64 - 2.0) * x.ln() - ln_gamma_m1).exp())
        .collect();
    let mut total = 1.0;
    for &l in blocks.sizes() {
        let le = l as i32;
        let mut acc = 0.0;
        for i in 0..n {
            let mut inner = 0.0;
            for k in 0..n {
                inner += ws[k] * dens[k] * q_matrix[i * n + k].powi(le);
            }
            acc += ws[i] * inner;
        }
        total *= acc;
    }
    OutageEstimate::analytic(clamp_unit(total, "dsps_downlink_sfa")?, Method::Sfa)
}

/// DSPS downlink outage with the step-function approximation applied twice:
/// the remaining Marcum-Q of [`dsps_downlink_sfa`] is itself stepped, leaving
/// one regularized upper-gamma term per node and block.
///
/// The tangent-line step abscissa aggregates the L ≥ 2 draws of a block; a
/// single-port block instead shifts the abscissa left by the stationarity
/// offset, which keeps this variant from degenerating at L = 1.
///
/// # Errors
///
/// As [`dsps_downlink_glq`].
pub fn dsps_downlink_sfa2(
    cfg: &SystemConfig,
    blocks: &BlockStructure,
    gamma_db: f64,
    rule: &QuadratureRule,
) -> Result<OutageEstimate> {
    let gamma = downlink_gamma(cfg, Some(blocks), gamma_db)?;
    if gamma == 0.0 {
        return OutageEstimate::analytic(0.0, Method::Sfa2);
    }
    let m = cfg.num_users;
    let mu2 = cfg.correlation;
    let xs = rule.nodes();
    let ws = rule.weights();
    let mut total = 1.0;
    for &l in blocks.sizes() {
        let mut sum = 0.0;
        for (&x, &w) in xs.iter().zip(ws) {
            let half = mu2 * x / (2.0 * (1.0 - mu2) * gamma);
            let dd = half.sqrt() + (half + 0.5 / gamma).sqrt();
            let t2n = (m as f64 - 1.5) / dd;
            let astar = if l >= 2 {
                let t1n = (l as f64 - 1.0) / SQRT_2PI;
                dd + (t1n + t2n) / (t1n * t2n + 1.0)
            } else {
                (dd - t2n).max(0.0)
            };
            let dtil = (1.0 - mu2) / (2.0 * mu2) * astar * astar;
            sum += w * gamma_q(m as f64 - 1.0, dtil)?;
        }
        total *= sum;
    }
    OutageEstimate::analytic(clamp_unit(total, "dsps_downlink_sfa2")?, Method::Sfa2)
}

/// DSPS uplink outage in closed form: selection by downlink SIR is
/// independent of the uplink product α β, so the outage is the single-port
/// tail 1 - Pr(α β > γ̂) = 1 - 2 γ̂^{m/2} K_m(2 √γ̂) / Γ(m).
///
/// Independent of the aperture and block structure; the uplink SNR target
/// enters only through the normalized threshold γ̂.
///
/// # Errors
///
/// Returns a configuration error for an invalid `cfg` and a domain error for
/// a NaN or +inf target.
pub fn dsps_uplink_closed(cfg: &SystemConfig, gamma_ul_db: f64) -> Result<OutageEstimate> {
    cfg.validate()?;
    let derived = cfg.derived_params(gamma_ul_db)?;
    let tail = product_tail(cfg.num_users, derived.gamma_hat)?;
    OutageEstimate::analytic(clamp_unit(1.0 - tail, "dsps_uplink_closed")?, Method::Closed)
}

// ---------------------------------------------------------------------------
#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::derive_blocks;
    use approx::assert_relative_eq;

    fn fig3_cfg() -> (SystemConfig, BlockStructure) {
        let cfg = SystemConfig::default(); // M = 4, N = 50, W = 3, mu2 = 0.97
        let blocks = derive_blocks(50, 3.0, 0.97, 1.0).unwrap();
        (cfg, blocks)
    }

    #[test]
    fn g_fun_is_a_probability() {
        for &gamma in &[0.1, 1.0, 10.0, 100.0] {
            for &r in &[0.05, 1.0, 10.0, 80.0] {
                for &rt in &[0.05, 1.0, 10.0, 80.0] {
                    let g = g_fun(gamma, 2.0 * r, 2.0 * rt, 4, 0.97).unwrap();
                    assert!(
                        (-1e-9..=1.0 + 1e-9).contains(&g),
                        "G({gamma}; {r}, {rt}) = {g}"
                    );
                }
            }
        }
    }

    /// For m = 2 the double sum collapses to a single Bessel term; check the
    /// general accumulation against a direct transcription.
    #[test]
    fn g_fun_two_user_special_case() {
        let (gamma, r, rt, mu2) = (2.5_f64, 1.3_f64, 0.7_f64, 0.97_f64);
        let (r2, rt2) = (2.0 * r, 2.0 * rt);
        let gp1 = gamma + 1.0;
        let c = mu2 / ((1.0 - mu2) * gp1);
        let w = c * (gamma * r2 * rt2).sqrt();
        let expected = marcum_q(1, (c * gamma * rt2).sqrt(), (c * r2).sqrt()).unwrap()
            - (-gp1.ln() - 0.5 * c * (gamma * rt2 + r2) + log_bessel_i(0, w).unwrap()).exp();
        assert_relative_eq!(
            g_fun(gamma, r2, rt2, 2, mu2).unwrap(),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn glq_matches_frozen_references() {
        let (cfg, blocks) = fig3_cfg();
        let rule = QuadratureRule::new(96).unwrap();
        // (gamma_db, outage) on the downlink sweep grid.
        for &(db, expect) in &[
            (-4.0, 0.00529),
            (0.0, 0.18327),
            (4.0, 0.69810),
            (10.0, 0.98202),
            (20.0, 0.99995),
        ] {
            let got = dsps_downlink_glq(&cfg, &blocks, db, &rule).unwrap().probability;
            assert!(
                (got - expect).abs() < 2e-5,
                "glq({db} dB) = {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn sfa_variants_match_frozen_references() {
        let (cfg, blocks) = fig3_cfg();
        let rule = QuadratureRule::new(96).unwrap();
        for &(db, expect) in &[(0.0, 0.23518), (4.0, 0.73076), (8.0, 0.95425)] {
            let got = dsps_downlink_sfa(&cfg, &blocks, db, &rule).unwrap().probability;
            assert!(
                (got - expect).abs() < 2e-5,
                "sfa({db} dB) = {got}, expected {expect}"
            );
        }
        for &(db, expect) in &[(0.0, 0.19456), (4.0, 0.68909), (12.0, 0.99278)] {
            let got = dsps_downlink_sfa2(&cfg, &blocks, db, &rule).unwrap().probability;
            assert!(
                (got - expect).abs() < 2e-5,
                "sfa2({db} dB) = {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn uplink_closed_reference_point() {
        // Defaults moved to the uplink operating point: Pt = 20 dBm, d = 12 m,
        // W = 4, gamma_U = 10 dB gives gamma_tilde = 6916.915.
        let cfg = SystemConfig {
            antenna_size: 4.0,
            distance: 12.0,
            ..SystemConfig::default()
        };
        let est = dsps_uplink_closed(&cfg, 10.0).unwrap();
        assert!(
            (est.probability - 0.3762).abs() < 5e-4,
            "closed-form uplink outage {}",
            est.probability
        );
        assert_eq!(est.method, Method::Closed);
        // -inf target never fails.
        assert_eq!(
            dsps_uplink_closed(&cfg, f64::NEG_INFINITY).unwrap().probability,
            0.0
        );
    }

    #[test]
    fn downlink_rejects_bad_targets() {
        let (cfg, blocks) = fig3_cfg();
        let rule = QuadratureRule::new(16).unwrap();
        for bad in [f64::NAN, f64::INFINITY] {
            assert!(dsps_downlink_glq(&cfg, &blocks, bad, &rule).is_err());
        }
        assert_eq!(
            dsps_downlink_glq(&cfg, &blocks, f64::NEG_INFINITY, &rule)
                .unwrap()
                .probability,
            0.0
        );
        let wrong = BlockStructure::uniform(10).unwrap();
        assert!(dsps_downlink_glq(&cfg, &wrong, 0.0, &rule).is_err());
    }
}
