//! Port-selection rules and the fixed-position selection-combining baseline.
//!
//! Each fluid-antenna strategy ranks the N ports by one scalar metric from
//! [`crate::channel::MetricDraw`] and activates the best port:
//!
//! - DSPS: downlink signal-to-interference ratio,
//! - DEPS: harvested downlink energy (equivalently total received power),
//! - UCPS: uplink channel power,
//! - USPS: uplink SNR (the product of harvested power and uplink gain).
//!
//! The FPA-SC baseline instead picks the best of K fixed, independently
//! fading antennas, judged by the metric of the link under test (SIR on the
//! downlink, uplink SNR on the uplink). An aperture of W wavelengths supports
//! at most ⌊2W⌋ + 1 such antennas at half-wavelength spacing.

use rand::Rng;

use crate::channel::{metrics, sample_draw, BlockStructure, MetricDraw, SystemConfig};
use crate::{Error, Result};

/// Which link's outage is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    /// Access point to user: outage when the selected port's SIR is low.
    Downlink,
    /// User to access point: outage when the harvested-energy SNR is low.
    Uplink,
}

impl Link {
    /// CSV/CLI token.
    #[must_use]
    pub fn token(self) -> &'static str {
        match self {
            Link::Downlink => "downlink",
            Link::Uplink => "uplink",
        }
    }
}

/// A port-selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Maximize downlink SIR.
    Dsps,
    /// Maximize harvested downlink energy.
    Deps,
    /// Maximize uplink channel power.
    Ucps,
    /// Maximize uplink SNR.
    Usps,
    /// Fixed-position selection combining over `ports` independent antennas.
    FpaSc {
        /// Number of fixed antennas K.
        ports: usize,
    },
}

impl StrategyKind {
    /// CSV/CLI token.
    #[must_use]
    pub fn token(self) -> &'static str {
        match self {
            StrategyKind::Dsps => "dsps",
            StrategyKind::Deps => "deps",
            StrategyKind::Ucps => "ucps",
            StrategyKind::Usps => "usps",
            StrategyKind::FpaSc { .. } => "fpa-sc",
        }
    }

    /// Parses a strategy token; `fpa_ports` supplies K for `fpa-sc`.
    ///
    /// # Errors
    ///
    /// Returns a configuration error for an unknown token or K = 0.
    pub fn parse_token(token: &str, fpa_ports: usize) -> Result<Self> {
        match token {
            "dsps" => Ok(StrategyKind::Dsps),
            "deps" => Ok(StrategyKind::Deps),
            "ucps" => Ok(StrategyKind::Ucps),
            "usps" => Ok(StrategyKind::Usps),
            "fpa-sc" => {
                if fpa_ports == 0 {
                    return Err(Error::config(
                        "fpa-sc needs at least one antenna".to_string(),
                    ));
                }
                Ok(StrategyKind::FpaSc { ports: fpa_ports })
            }
            other => Err(Error::config(format!("unknown strategy token '{other}'"))),
        }
    }

    fn metric<'a>(self, link: Link, m: &'a MetricDraw) -> &'a [f64] {
        match self {
            StrategyKind::Dsps => &m.sir,
            StrategyKind::Deps => &m.ehp,
            StrategyKind::Ucps => &m.beta,
            StrategyKind::Usps => &m.ul_snr,
            StrategyKind::FpaSc { .. } => match link {
                Link::Downlink => &m.sir,
                Link::Uplink => &m.ul_snr,
            },
        }
    }
}

/// Maximum number of independent fixed antennas an aperture of W wavelengths
/// supports at half-wavelength spacing: ⌊2W⌋ + 1.
#[must_use]
pub fn fpa_port_budget(antenna_size: f64) -> usize {
    (2.0 * antenna_size).floor() as usize + 1
}

/// Index of the port the strategy activates, 0-based; ties break to the
/// lowest index. A single-port draw trivially selects port 0.
///
/// # Errors
///
/// Returns a domain error for an empty metric vector.
pub fn select_port(kind: StrategyKind, link: Link, m: &MetricDraw) -> Result<usize> {
    let values = kind.metric(link, m);
    if values.is_empty() {
        return Err(Error::domain("select_port needs at least one port".to_string()));
    }
    let mut best = 0usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Draws one realization of the FPA-SC baseline with `ports` independent
/// unit-Rayleigh antennas and returns the selected antenna's metric for the
/// link under test (linear SIR on the downlink, linear uplink SNR on the
/// uplink).
///
/// # Errors
///
/// Returns a configuration error for an invalid `cfg`, `ports` = 0, or
/// `ports` exceeding the aperture budget ⌊2W⌋ + 1.
pub fn fpa_sc_baseline(
    cfg: &SystemConfig,
    ports: usize,
    link: Link,
    rng: &mut impl Rng,
) -> Result<f64> {
    cfg.validate()?;
    let budget = fpa_port_budget(cfg.antenna_size);
    if ports == 0 || ports > budget {
        return Err(Error::config(format!(
            "fpa-sc antenna count must lie in 1..={budget} for W = {}, got {ports}",
            cfg.antenna_size
        )));
    }
    // Single-port blocks make the antennas mutually independent while keeping
    // the per-antenna marginal identical to the fluid-antenna ports.
    let blocks = BlockStructure::uniform(ports)?;
    let draw = sample_draw(cfg, &blocks, rng)?;
    let m = metrics(cfg, &draw)?;
    let kind = StrategyKind::FpaSc { ports };
    let idx = select_port(kind, link, &m)?;
    Ok(match link {
        Link::Downlink => m.sir[idx],
        Link::Uplink => m.ul_snr[idx],
    })
}

// ---------------------------------------------------------------------------
#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{db_to_linear, derive_blocks};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn metric_draw(sir: Vec<f64>) -> MetricDraw {
        let n = sir.len();
        MetricDraw {
            x: vec![0.0; n],
            y: vec![0.0; n],
            alpha: vec![0.0; n],
            beta: vec![0.0; n],
            sir,
            ehp: vec![0.0; n],
            ul_snr: vec![0.0; n],
        }
    }

    #[test]
    fn dsps_picks_highest_sir() {
        let m = metric_draw(vec![1.0, 5.0, 2.0]);
        assert_eq!(select_port(StrategyKind::Dsps, Link::Downlink, &m).unwrap(), 1);
    }

    #[test]
    fn single_port_and_ties() {
        let m = metric_draw(vec![3.0]);
        assert_eq!(select_port(StrategyKind::Dsps, Link::Downlink, &m).unwrap(), 0);
        let m = metric_draw(vec![2.0, 7.0, 7.0, 1.0]);
        assert_eq!(select_port(StrategyKind::Dsps, Link::Downlink, &m).unwrap(), 1);
        let m = metric_draw(vec![]);
        assert!(select_port(StrategyKind::Dsps, Link::Downlink, &m).is_err());
    }

    #[test]
    fn usps_matches_product_argmax_and_deps_matches_total_power() {
        let cfg = SystemConfig::default();
        let blocks = derive_blocks(50, 3.0, 0.97, 1.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..200 {
            let draw = crate::channel::sample_draw(&cfg, &blocks, &mut rng).unwrap();
            let m = crate::channel::metrics(&cfg, &draw).unwrap();
            let argmax = |v: Vec<f64>| {
                v.iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)
                    .unwrap()
            };
            let product: Vec<f64> =
                m.alpha.iter().zip(&m.beta).map(|(a, b)| a * b).collect();
            assert_eq!(
                select_port(StrategyKind::Usps, Link::Uplink, &m).unwrap(),
                argmax(product)
            );
            let totals: Vec<f64> = (0..50)
                .map(|n| draw.downlink.iter().map(|g| g[n].norm_sqr()).sum())
                .collect();
            assert_eq!(
                select_port(StrategyKind::Deps, Link::Uplink, &m).unwrap(),
                argmax(totals)
            );
        }
    }

    #[test]
    fn selection_is_scale_invariant() {
        // Transmit power scales ehp and ul_snr but never moves the argmax.
        let cfg = SystemConfig::default();
        let boosted = SystemConfig { transmit_power_dbm: 37.0, ..cfg.clone() };
        let blocks = derive_blocks(50, 3.0, 0.97, 1.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for _ in 0..100 {
            let draw = crate::channel::sample_draw(&cfg, &blocks, &mut rng).unwrap();
            let m1 = crate::channel::metrics(&cfg, &draw).unwrap();
            let m2 = crate::channel::metrics(&boosted, &draw).unwrap();
            for kind in [
                StrategyKind::Dsps,
                StrategyKind::Deps,
                StrategyKind::Ucps,
                StrategyKind::Usps,
            ] {
                assert_eq!(
                    select_port(kind, Link::Uplink, &m1).unwrap(),
                    select_port(kind, Link::Uplink, &m2).unwrap()
                );
            }
        }
    }

    #[test]
    fn aperture_budget() {
        assert_eq!(fpa_port_budget(1.0), 3);
        assert_eq!(fpa_port_budget(3.0), 7);
        assert_eq!(fpa_port_budget(4.0), 9);
    }

    #[test]
    fn token_round_trip() {
        for token in ["dsps", "deps", "ucps", "usps", "fpa-sc"] {
            let kind = StrategyKind::parse_token(token, 7).unwrap();
            assert_eq!(kind.token(), token);
        }
        assert!(StrategyKind::parse_token("sc", 7).is_err());
        assert!(StrategyKind::parse_token("fpa-sc", 0).is_err());
    }

    #[test]
    fn fpa_baseline_rejects_overbudget() {
        let cfg = SystemConfig::default(); // W = 3 → budget 7
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(fpa_sc_baseline(&cfg, 8, Link::Downlink, &mut rng).is_err());
        assert!(fpa_sc_baseline(&cfg, 0, Link::Downlink, &mut rng).is_err());
        assert!(fpa_sc_baseline(&cfg, 7, Link::Downlink, &mut rng).is_ok());
    }

    /// With a single antenna there is no selection gain, so the downlink
    /// outage is the interference-limited closed form 1 − (γ+1)^{1−M}.
    #[test]
    fn fpa_single_antenna_matches_closed_form() {
        let cfg = SystemConfig::default();
        let gamma = db_to_linear(0.0);
        let trials = 20_000;
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut outages = 0u32;
        for _ in 0..trials {
            let sir = fpa_sc_baseline(&cfg, 1, Link::Downlink, &mut rng).unwrap();
            if sir < gamma {
                outages += 1;
            }
        }
        let p = f64::from(outages) / f64::from(trials);
        let expected = 1.0 - (gamma + 1.0).powi(1 - cfg.num_users as i32);
        let ci = 1.96 * (expected * (1.0 - expected) / f64::from(trials)).sqrt();
        assert!(
            (p - expected).abs() <= 3.0 * ci,
            "MC {p} vs closed form {expected} (3CI = {})",
            3.0 * ci
        );
    }
}
