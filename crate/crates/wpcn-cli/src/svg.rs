//! Self-contained SVG rendering of scenario rows: one value-versus-sweep
//! curve per (strategy, link, method) series.
//!
//! The output is a plain string with fixed-precision coordinates, so the
//! same rows always render to the same bytes. Outage scenarios use a log10
//! vertical axis (zero estimates break the polyline rather than clamping);
//! diagnostic scenarios use a linear one.

use crate::run::Row;
use crate::scenario::{Scenario, ScenarioKind};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 250.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;

/// Okabe-Ito palette: colorblind-safe and printable.
const PALETTE: [&str; 8] = [
    "#0072b2", "#d55e00", "#009e73", "#cc79a7", "#e69f00", "#56b4e9", "#f0e442", "#000000",
];

struct Series<'a> {
    label: String,
    method: &'a str,
    points: Vec<(f64, f64)>,
}

/// Renders rows into a standalone SVG document.
#[must_use]
pub fn render(s: &Scenario, rows: &[Row]) -> String {
    let series = collect_series(rows);
    let log_y = s.kind == ScenarioKind::Outage;

    let (x_lo, x_hi) = axis_range(rows.iter().map(|r| r.sweep_value));
    let (y_lo, y_hi) = if log_y {
        log_axis_range(rows.iter().map(|r| r.value))
    } else {
        axis_range(rows.iter().map(|r| r.value))
    };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_pos = |v: f64| MARGIN_LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w;
    let y_pos = |v: f64| {
        let t = if log_y { (v.log10() - y_lo) / (y_hi - y_lo) } else { (v - y_lo) / (y_hi - y_lo) };
        MARGIN_TOP + (1.0 - t) * plot_h
    };

    let mut out = String::with_capacity(16 * 1024);
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"26\" font-size=\"16\" text-anchor=\"middle\">{}: {} vs {}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        s.name,
        y_label(s.kind),
        s.sweep.token()
    ));

    draw_axes(&mut out, s, log_y, (x_lo, x_hi), (y_lo, y_hi), x_pos, y_pos);

    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        draw_series(&mut out, ser, color, log_y, x_pos, y_pos);
        let ly = MARGIN_TOP + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 24.0;
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{color}\" \
             stroke-width=\"2\"{}/>\n",
            lx,
            ly,
            lx + 26.0,
            ly,
            dash_attr(ser.method)
        ));
        if ser.method == "mc" {
            out.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"4\" fill=\"{color}\"/>\n",
                lx + 13.0,
                ly
            ));
        }
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            lx + 32.0,
            ly + 4.0,
            ser.label
        ));
    }

    out.push_str("</svg>\n");
    out
}

fn y_label(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::Outage => "outage probability",
        ScenarioKind::Threshold => "threshold abscissa",
        ScenarioKind::Eigen => "value",
    }
}

fn collect_series(rows: &[Row]) -> Vec<Series<'_>> {
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        let label = if r.strategy == "diagnostic" {
            r.method.clone()
        } else {
            format!("{} {} {}", r.strategy, r.link, r.method)
        };
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((r.sweep_value, r.value)),
            None => series.push(Series {
                label,
                method: &r.method,
                points: vec![(r.sweep_value, r.value)],
            }),
        }
    }
    series
}

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        // Degenerate span: pad symmetrically so the curve sits mid-plot.
        let pad = if hi.abs() > 1e-12 { hi.abs() * 0.5 } else { 0.5 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Log-axis bounds in log10 units, spanning whole decades. The top is
/// pinned to 10^0 because the plotted quantity is a probability.
fn log_axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    for v in values {
        if v > 0.0 {
            lo = lo.min(v);
        }
    }
    if !lo.is_finite() {
        return (-6.0, 0.0);
    }
    let floor = lo.log10().floor().max(-12.0).min(-1.0);
    (floor, 0.0)
}

#[allow(clippy::too_many_arguments)]
fn draw_axes(
    out: &mut String,
    s: &Scenario,
    log_y: bool,
    (x_lo, x_hi): (f64, f64),
    (y_lo, y_hi): (f64, f64),
    x_pos: impl Fn(f64) -> f64,
    y_pos: impl Fn(f64) -> f64,
) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = MARGIN_TOP;
    let y1 = HEIGHT - MARGIN_BOTTOM;
    out.push_str(&format!(
        "<rect x=\"{x0}\" y=\"{y0}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" \
         stroke=\"#444444\"/>\n",
        x1 - x0,
        y1 - y0
    ));

    // X ticks at grid values, subsampled to at most 12 labels.
    let mut ticks: Vec<f64> = s.grid.clone();
    ticks.retain(|v| *v >= x_lo - 1e-9 && *v <= x_hi + 1e-9);
    let stride = ticks.len().div_ceil(12).max(1);
    for v in ticks.iter().step_by(stride) {
        let x = x_pos(*v);
        out.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{y1:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#444444\"/>\n",
            y1 + 6.0
        ));
        out.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            y1 + 22.0,
            trim_number(*v)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
        (x0 + x1) / 2.0,
        y1 + 44.0,
        s.sweep.token()
    ));

    if log_y {
        let mut d = y_lo.round() as i32;
        while f64::from(d) <= y_hi + 1e-9 {
            let y = y_pos(10f64.powi(d));
            out.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{x0:.1}\" y2=\"{y:.1}\" \
                 stroke=\"#444444\"/>\n",
                x0 - 6.0
            ));
            out.push_str(&format!(
                "<line x1=\"{x0:.1}\" y1=\"{y:.1}\" x2=\"{x1:.1}\" y2=\"{y:.1}\" \
                 stroke=\"#dddddd\"/>\n"
            ));
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{d}</text>\n",
                x0 - 10.0,
                y + 4.0
            ));
            d += 1;
        }
    } else {
        for k in 0..=4 {
            let v = y_lo + (y_hi - y_lo) * f64::from(k) / 4.0;
            let y = y_pos(v);
            out.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{x0:.1}\" y2=\"{y:.1}\" \
                 stroke=\"#444444\"/>\n",
                x0 - 6.0
            ));
            out.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
                x0 - 10.0,
                y + 4.0,
                trim_number(v)
            ));
        }
    }
    out.push_str(&format!(
        "<text x=\"20\" y=\"{:.1}\" transform=\"rotate(-90 20 {:.1})\" \
         text-anchor=\"middle\">{}</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        y_label(s.kind)
    ));
}

fn draw_series(
    out: &mut String,
    ser: &Series,
    color: &str,
    log_y: bool,
    x_pos: impl Fn(f64) -> f64,
    y_pos: impl Fn(f64) -> f64,
) {
    let visible = |v: f64| !log_y || v > 0.0;
    if ser.method == "mc" {
        for &(x, v) in &ser.points {
            if visible(v) {
                out.push_str(&format!(
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"4\" fill=\"{color}\"/>\n",
                    x_pos(x),
                    y_pos(v)
                ));
            }
        }
        return;
    }
    // Polyline with gaps where a log-scale point is not plottable.
    let mut path = String::new();
    let mut pen_down = false;
    for &(x, v) in &ser.points {
        if visible(v) {
            let cmd = if pen_down { 'L' } else { 'M' };
            path.push_str(&format!("{cmd}{:.1} {:.1} ", x_pos(x), y_pos(v)));
            pen_down = true;
        } else {
            pen_down = false;
        }
    }
    if !path.is_empty() {
        out.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{}/>\n",
            path.trim_end(),
            dash_attr(ser.method)
        ));
    }
    for &(x, v) in &ser.points {
        if visible(v) {
            out.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"{color}\"/>\n",
                x_pos(x),
                y_pos(v)
            ));
        }
    }
}

fn dash_attr(method: &str) -> &'static str {
    if method == "lb" || method == "lb-closed" {
        " stroke-dasharray=\"8 5\""
    } else {
        ""
    }
}

/// Short tick label: integers render bare, others with up to three decimals.
fn trim_number(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}
