//! Scenario execution: evaluates every grid point, strategy, link, and
//! method combination into ordered rows and renders them as CSV.
//!
//! Rows follow grid-major order (grid index first, then strategies, links,
//! and methods as listed), regardless of how the underlying work is
//! scheduled: Monte Carlo trials are chunked onto fixed counter-mode streams
//! inside the core engine, so row content is independent of worker count.
//! Combinations without an evaluator are skipped; scenario validation has
//! already guaranteed that every listed token produces at least one row.

use std::collections::HashMap;

use wpcn_core::analytic::{
    deps_downlink_closed, deps_uplink_glq, deps_uplink_lb, deps_uplink_lb_closed, deps_uplink_sfa,
    dsps_downlink_glq, dsps_downlink_sfa, dsps_downlink_sfa2, dsps_uplink_closed, sfa_threshold,
    ucps_downlink_closed, ucps_uplink_glq, ucps_uplink_lb, ucps_uplink_sfa, usps_downlink_closed,
    usps_uplink_lb, usps_uplink_nested, usps_uplink_sfa,
};
use wpcn_core::channel::{derive_blocks, jakes_matrix, BlockStructure, SystemConfig};
use wpcn_core::montecarlo::{estimate_outage, sweep, Method, OutageEstimate, SweepPoint};
use wpcn_core::specfun::QuadratureRule;
use wpcn_core::strategy::{fpa_port_budget, Link, StrategyKind};

use crate::diagnostic::numeric_inflection;
use crate::scenario::{method_applies, PointSetup, Scenario, ScenarioKind, SweepVar};
use crate::CliError;

/// One evaluated quantity at one grid point; one CSV row.
#[derive(Debug, Clone)]
pub struct Row {
    /// The swept value.
    pub sweep_value: f64,
    /// Strategy token, or `diagnostic` for non-outage rows.
    pub strategy: String,
    /// Link token, or `none` for non-outage rows.
    pub link: String,
    /// Method token.
    pub method: String,
    /// The evaluated quantity: an outage probability, a threshold abscissa,
    /// a block count, or an eigenvalue deviation.
    pub value: f64,
    /// 95% confidence half-width; 0 for analytic values.
    pub ci_half_width: f64,
    /// Monte Carlo trials behind the value; 1 for analytic values.
    pub trials: u64,
}

/// Evaluates a scenario into its ordered rows.
///
/// # Errors
///
/// Configuration error when a grid point produces an invalid system or an
/// evaluator rejects its inputs.
pub fn execute(s: &Scenario, glq_order: usize) -> Result<Vec<Row>, CliError> {
    match s.kind {
        ScenarioKind::Outage => execute_outage(s, glq_order),
        ScenarioKind::Threshold => execute_threshold(s),
        ScenarioKind::Eigen => execute_eigen(s),
    }
}

fn execute_outage(s: &Scenario, glq_order: usize) -> Result<Vec<Row>, CliError> {
    let rule = QuadratureRule::new(glq_order)?;
    let points: Vec<PointSetup> =
        (0..s.grid.len()).map(|i| s.point_setup(i)).collect::<Result<_, _>>()?;
    let wants_mc = s.methods.iter().any(|m| m == "mc");
    let mut mc: HashMap<(String, Link), Vec<OutageEstimate>> = HashMap::new();
    if wants_mc {
        for st in &s.strategies {
            for &link in &s.links {
                mc.insert((st.clone(), link), mc_sweep(st, link, &points, s)?);
            }
        }
    }
    let mut rows = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for st in &s.strategies {
            for &link in &s.links {
                for m in &s.methods {
                    if !method_applies(st, link, m) {
                        continue;
                    }
                    let est = if m == "mc" {
                        mc[&(st.clone(), link)][i]
                    } else {
                        analytic_estimate(st, link, m, p, &rule)?
                    };
                    rows.push(Row {
                        sweep_value: p.sweep_value,
                        strategy: st.clone(),
                        link: link.token().to_string(),
                        method: m.clone(),
                        value: est.probability,
                        ci_half_width: est.ci_half_width,
                        trials: est.trials,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Monte Carlo estimates for one strategy and link across the whole grid,
/// ordered by grid index.
pub(crate) fn mc_sweep(
    strategy: &str,
    link: Link,
    points: &[PointSetup],
    s: &Scenario,
) -> Result<Vec<OutageEstimate>, CliError> {
    // The fixed-antenna count tracks the aperture, so an aperture sweep needs
    // a per-point strategy value; every other sweep shares one.
    if strategy == "fpa-sc" && s.sweep == SweepVar::AntennaSize {
        return points
            .iter()
            .map(|p| {
                let kind =
                    StrategyKind::parse_token(strategy, fpa_port_budget(p.cfg.antenna_size))?;
                estimate_outage(
                    &p.cfg,
                    &p.blocks,
                    kind,
                    link,
                    p.threshold_db(link).map_err(to_core_config)?,
                    s.trials,
                    s.seed,
                )
            })
            .collect::<wpcn_core::Result<_>>()
            .map_err(CliError::from);
    }
    let kind = StrategyKind::parse_token(strategy, fpa_port_budget(s.cfg.antenna_size))?;
    let sweep_points: Vec<SweepPoint> = points
        .iter()
        .map(|p| {
            Ok(SweepPoint {
                cfg: p.cfg.clone(),
                blocks: p.blocks.clone(),
                threshold_db: p.threshold_db(link)?,
            })
        })
        .collect::<Result<_, CliError>>()?;
    sweep(&sweep_points, kind, link, s.trials, s.seed).map_err(CliError::from)
}

fn to_core_config(e: CliError) -> wpcn_core::Error {
    wpcn_core::Error::config(e.to_string())
}

/// Dispatches one analytic method token to its evaluator.
///
/// # Errors
///
/// Configuration error when the combination has no evaluator (callers filter
/// with [`method_applies`] first) or the evaluator rejects its inputs.
pub(crate) fn analytic_estimate(
    strategy: &str,
    link: Link,
    method: &str,
    p: &PointSetup,
    rule: &QuadratureRule,
) -> Result<OutageEstimate, CliError> {
    let cfg = &p.cfg;
    let est = match link {
        Link::Downlink => {
            let g = p.threshold_db(Link::Downlink)?;
            match (strategy, method) {
                ("dsps", "glq") => dsps_downlink_glq(cfg, &p.blocks, g, rule),
                ("dsps", "sfa") => dsps_downlink_sfa(cfg, &p.blocks, g, rule),
                ("dsps", "sfa2") => dsps_downlink_sfa2(cfg, &p.blocks, g, rule),
                ("deps", "closed") => deps_downlink_closed(cfg.num_users, g),
                ("ucps", "closed") => ucps_downlink_closed(cfg.num_users, g),
                ("usps", "closed") => usps_downlink_closed(cfg.num_users, g),
                ("fpa-sc", "closed") => fpa_downlink_closed(cfg, g),
                _ => {
                    return Err(CliError::Config(format!(
                        "no downlink evaluator for strategy '{strategy}' and method '{method}'"
                    )));
                }
            }
        }
        Link::Uplink => {
            let g = p.threshold_db(Link::Uplink)?;
            match (strategy, method) {
                ("dsps", "closed") => dsps_uplink_closed(cfg, g),
                ("deps", "glq") => deps_uplink_glq(cfg, &p.blocks, g, rule),
                ("deps", "sfa") => deps_uplink_sfa(cfg, &p.blocks, g, rule),
                ("deps", "lb") => deps_uplink_lb(cfg, g, rule),
                ("deps", "lb-closed") => deps_uplink_lb_closed(cfg, g, rule),
                ("ucps", "glq") => ucps_uplink_glq(cfg, &p.blocks, g, rule),
                ("ucps", "sfa") => ucps_uplink_sfa(cfg, &p.blocks, g, rule),
                ("ucps", "lb") => ucps_uplink_lb(cfg, g, rule),
                ("usps", "nested") => usps_uplink_nested(cfg, &p.blocks, g, rule),
                ("usps", "sfa") => usps_uplink_sfa(cfg, &p.blocks, g, rule),
                ("usps", "lb") => usps_uplink_lb(cfg, g),
                ("fpa-sc", "closed") => fpa_uplink_closed(cfg, g),
                _ => {
                    return Err(CliError::Config(format!(
                        "no uplink evaluator for strategy '{strategy}' and method '{method}'"
                    )));
                }
            }
        }
    };
    est.map_err(CliError::from)
}

/// Downlink outage of the fixed-antenna selection-combining baseline: each
/// of the K = ⌊2W⌋ + 1 independent antennas sees the single-port
/// interference-limited outage, and best-SIR selection fails only when all
/// K fail.
fn fpa_downlink_closed(cfg: &SystemConfig, gamma_db: f64) -> wpcn_core::Result<OutageEstimate> {
    let ports = fpa_port_budget(cfg.antenna_size);
    let single = deps_downlink_closed(cfg.num_users, gamma_db)?.probability;
    OutageEstimate::analytic(single.powi(ports as i32), Method::Closed)
}

/// Uplink analog of [`fpa_downlink_closed`]: the per-antenna outage is the
/// product-tail closed form, and best-SNR selection fails only when all K
/// antennas fail.
fn fpa_uplink_closed(cfg: &SystemConfig, gamma_ul_db: f64) -> wpcn_core::Result<OutageEstimate> {
    let ports = fpa_port_budget(cfg.antenna_size);
    let single = dsps_uplink_closed(cfg, gamma_ul_db)?.probability;
    OutageEstimate::analytic(single.powi(ports as i32), Method::Closed)
}

fn execute_threshold(s: &Scenario) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for &v in &s.grid {
        let (shape, draws) = match s.sweep {
            SweepVar::Shape => (v as usize, s.marcum_draws),
            SweepVar::Draws => (s.marcum_shape, v as usize),
            _ => unreachable!("validated: threshold scenarios sweep shape or draws"),
        };
        for m in &s.methods {
            let value = match m.as_str() {
                "sfa" => sfa_threshold(s.marcum_b, draws, shape)?.value,
                "numeric" => numeric_inflection(s.marcum_b, draws, shape)?,
                _ => unreachable!("validated: threshold methods are sfa or numeric"),
            };
            rows.push(Row {
                sweep_value: v,
                strategy: "diagnostic".to_string(),
                link: "none".to_string(),
                method: m.clone(),
                value,
                ci_half_width: 0.0,
                trials: 1,
            });
        }
    }
    Ok(rows)
}

fn execute_eigen(s: &Scenario) -> Result<Vec<Row>, CliError> {
    let mut rows = Vec::new();
    for &v in &s.grid {
        let n = v as usize;
        let blocks = derive_blocks(n, s.cfg.antenna_size, s.cfg.correlation, s.eigen_threshold)?;
        for m in &s.methods {
            let value = match m.as_str() {
                "blocks" => blocks.num_blocks() as f64,
                "eigen-dev" => {
                    eigen_deviation(n, s.cfg.antenna_size, s.cfg.correlation, &blocks)?
                }
                _ => unreachable!("validated: eigen methods are blocks or eigen-dev"),
            };
            rows.push(Row {
                sweep_value: v,
                strategy: "diagnostic".to_string(),
                link: "none".to_string(),
                method: m.clone(),
                value,
                ci_half_width: 0.0,
                trials: 1,
            });
        }
    }
    Ok(rows)
}

/// Largest relative deviation between the block dominant eigenvalues
/// 1 − μ² + μ²L_b and the same number of top Jakes eigenvalues, both in
/// decreasing order. Zero means the compression reproduces the dominant
/// spectrum exactly.
///
/// # Errors
///
/// Configuration error from the Jakes matrix construction.
pub fn eigen_deviation(
    num_ports: usize,
    antenna_size: f64,
    correlation: f64,
    blocks: &BlockStructure,
) -> Result<f64, CliError> {
    let jakes = jakes_matrix(num_ports, antenna_size)?;
    let mut spectrum: Vec<f64> = jakes.symmetric_eigenvalues().iter().copied().collect();
    spectrum.sort_by(|a, b| b.total_cmp(a));
    let mut model = blocks.dominant_eigenvalues(correlation);
    model.sort_by(|a, b| b.total_cmp(a));
    let dev = model
        .iter()
        .zip(&spectrum)
        .map(|(m, j)| ((m - j) / j).abs())
        .fold(0.0, f64::max);
    Ok(dev)
}

/// Renders rows as the CSV artifact of record. Every float carries 17
/// significant digits so a re-parse reproduces it bit-exactly; rerunning a
/// scenario with the same seed reproduces the bytes.
#[must_use]
pub fn to_csv(s: &Scenario, rows: &[Row]) -> String {
    let mut out = String::with_capacity(96 * (rows.len() + 1));
    out.push_str("scenario,sweep_var,sweep_value,strategy,link,method,value,ci_half_width,trials,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.16e},{},{},{},{:.16e},{:.16e},{},{}\n",
            s.name,
            s.sweep.token(),
            r.sweep_value,
            r.strategy,
            r.link,
            r.method,
            r.value,
            r.ci_half_width,
            r.trials,
            s.seed
        ));
    }
    out
}

// ---------------------------------------------------------------------------
#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin;

    /// A small downlink scenario that exercises every row source quickly.
    fn small_scenario() -> Scenario {
        let mut s = builtin("fig3").unwrap();
        s.grid = vec![0.0, 10.0];
        s.cfg.num_ports = 10;
        s.trials = 2000;
        s
    }

    #[test]
    fn rows_follow_grid_major_listed_order() {
        let s = small_scenario();
        let rows = execute(&s, 48).unwrap();
        // 2 grid points x (dsps: glq,sfa,sfa2,mc + fpa-sc: closed,mc) = 12.
        assert_eq!(rows.len(), 12);
        assert!(rows[..6].iter().all(|r| r.sweep_value == 0.0));
        assert!(rows[6..].iter().all(|r| r.sweep_value == 10.0));
        let tags: Vec<(&str, &str)> = rows[..6]
            .iter()
            .map(|r| (r.strategy.as_str(), r.method.as_str()))
            .collect();
        assert_eq!(
            tags,
            [
                ("dsps", "glq"),
                ("dsps", "sfa"),
                ("dsps", "sfa2"),
                ("dsps", "mc"),
                ("fpa-sc", "closed"),
                ("fpa-sc", "mc"),
            ]
        );
        for r in &rows {
            assert!((0.0..=1.0).contains(&r.value), "row value {}", r.value);
            if r.method == "mc" {
                assert_eq!(r.trials, 2000);
                assert!(r.ci_half_width > 0.0);
            } else {
                assert_eq!(r.trials, 1);
                assert_eq!(r.ci_half_width, 0.0);
            }
        }
    }

    #[test]
    fn analytic_rows_track_monte_carlo() {
        let s = small_scenario();
        let rows = execute(&s, 48).unwrap();
        for pair in [(0, 3), (4, 5), (6, 9), (10, 11)] {
            let (a, mc) = (&rows[pair.0], &rows[pair.1]);
            assert_eq!(a.strategy, mc.strategy);
            let tol = 0.02_f64.max(3.0 * mc.ci_half_width);
            assert!(
                (a.value - mc.value).abs() <= tol,
                "{} {} {} vs mc: {} vs {}",
                a.strategy,
                a.method,
                a.sweep_value,
                a.value,
                mc.value
            );
        }
    }

    #[test]
    fn csv_is_deterministic_and_17_digit() {
        let s = small_scenario();
        let rows = execute(&s, 48).unwrap();
        let csv1 = to_csv(&s, &rows);
        let rows2 = execute(&s, 48).unwrap();
        let csv2 = to_csv(&s, &rows2);
        assert_eq!(csv1, csv2);
        let mut lines = csv1.lines();
        assert_eq!(
            lines.next().unwrap(),
            "scenario,sweep_var,sweep_value,strategy,link,method,value,ci_half_width,trials,seed"
        );
        let first = lines.next().unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields.len(), 10);
        assert_eq!(fields[0], "fig3");
        assert_eq!(fields[1], "gamma-db");
        // 17 significant digits: mantissa d.dddddddddddddddd + exponent.
        assert!(
            fields[2].starts_with("0.0000000000000000e0"),
            "sweep value field: {}",
            fields[2]
        );
        assert!(fields[6].contains('e'), "value field: {}", fields[6]);
        let mantissa = fields[6].trim_start_matches('-');
        let digits: String =
            mantissa.chars().take_while(|c| *c != 'e').filter(char::is_ascii_digit).collect();
        assert_eq!(digits.len(), 17, "value field: {}", fields[6]);
    }

    #[test]
    fn threshold_rows_carry_both_constructions() {
        let s = builtin("fig10").unwrap();
        let rows = execute(&s, 48).unwrap();
        assert_eq!(rows.len(), 2 * s.grid.len());
        for pair in rows.chunks(2) {
            assert_eq!(pair[0].method, "sfa");
            assert_eq!(pair[1].method, "numeric");
            assert_eq!(pair[0].strategy, "diagnostic");
            assert_eq!(pair[0].link, "none");
            assert!(pair[0].value > 0.0 && pair[1].value > 0.0);
            // b = 100 sits deep in the validity region at every order.
            let rel = ((pair[0].value - pair[1].value) / pair[1].value).abs();
            assert!(rel < 0.05, "p={} rel={rel}", pair[0].sweep_value);
        }
    }

    #[test]
    fn eigen_rows_report_blocks_and_deviation() {
        let s = builtin("fig12").unwrap();
        let rows = execute(&s, 48).unwrap();
        assert_eq!(rows.len(), 6);
        let n50_blocks = rows
            .iter()
            .find(|r| r.sweep_value == 50.0 && r.method == "blocks")
            .unwrap();
        assert!(
            (4.0..=9.0).contains(&n50_blocks.value),
            "N=50 block count {}",
            n50_blocks.value
        );
        let n50_dev = rows
            .iter()
            .find(|r| r.sweep_value == 50.0 && r.method == "eigen-dev")
            .unwrap();
        assert!(n50_dev.value < 0.10, "N=50 deviation {}", n50_dev.value);
    }

    #[test]
    fn fpa_closed_forms_match_their_independence_construction() {
        // With K independent antennas the closed forms are single-antenna
        // outages raised to K; spot-check against Monte Carlo.
        let mut s = builtin("fig5").unwrap();
        s.grid = vec![10.0];
        s.strategies = vec!["fpa-sc".to_string()];
        s.trials = 40_000;
        let rows = execute(&s, 48).unwrap();
        assert_eq!(rows.len(), 2);
        let (closed, mc) = (&rows[0], &rows[1]);
        assert_eq!(closed.method, "closed");
        assert!(
            (closed.value - mc.value).abs() <= 0.02_f64.max(3.0 * mc.ci_half_width),
            "fpa-sc uplink closed {} vs mc {}",
            closed.value,
            mc.value
        );
    }
}
