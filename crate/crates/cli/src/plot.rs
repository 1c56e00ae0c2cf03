//! Self-contained SVG line charts for convergence traces. No external
//! rendering dependency; the output is a plain SVG 1.1 document with
//! polylines, axes, and a legend.

use std::fmt::Write as _;

use bregmf::optimize::Trace;
use bregmf::{Error, Result};

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Offset added to the optimality gap before log scaling.
pub const GAP_OFFSET: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    Iter,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YAxis {
    Objective,
    /// `objective - v(P) + offset` on a log axis, where `v(P)` is the least
    /// objective attained by any of the supplied traces.
    Gap,
    TestRmse,
}

pub struct NamedTrace {
    pub name: String,
    pub trace: Trace,
}

/// Render the supplied traces as one chart. `Gap` needs at least the
/// objective column; `TestRmse` and `Time` require those columns populated.
pub fn render_traces(traces: &[NamedTrace], x: XAxis, y: YAxis) -> Result<String> {
    if traces.is_empty() {
        return Err(Error::InvalidInput("plot needs at least one trace".into()));
    }
    let v_best = traces
        .iter()
        .flat_map(|t| t.trace.records.iter().map(|r| r.objective))
        .fold(f64::INFINITY, f64::min);

    let mut series = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        let mut points = Vec::with_capacity(t.trace.records.len());
        for r in &t.trace.records {
            let xv = match x {
                XAxis::Iter => r.iter as f64,
                XAxis::Time => {
                    if r.elapsed_sec == 0.0 && r.iter > 1 {
                        return Err(Error::InvalidInput(format!(
                            "trace {:?} has no timing data; rerun with --timing",
                            t.name
                        )));
                    }
                    r.elapsed_sec
                }
            };
            let yv = match y {
                YAxis::Objective => r.objective,
                YAxis::Gap => r.objective - v_best + GAP_OFFSET,
                YAxis::TestRmse => r.test_rmse.ok_or_else(|| {
                    Error::InvalidInput(format!("trace {:?} has no test_rmse column", t.name))
                })?,
            };
            points.push((xv, yv));
        }
        series.push(Series { name: t.name.clone(), color: PALETTE[i % PALETTE.len()], points });
    }
    let log_y = matches!(y, YAxis::Gap);
    let y_label = match y {
        YAxis::Objective => "objective",
        YAxis::Gap => "objective gap (log)",
        YAxis::TestRmse => "test RMSE",
    };
    let x_label = match x {
        XAxis::Iter => "iteration",
        XAxis::Time => "time (s)",
    };
    Ok(render_chart(&series, x_label, y_label, log_y))
}

struct Series {
    name: String,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

fn render_chart(series: &[Series], x_label: &str, y_label: &str, log_y: bool) -> String {
    let tx = |v: f64| v;
    let ty = |v: f64| if log_y { v.max(f64::MIN_POSITIVE).log10() } else { v };

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            x_min = x_min.min(tx(x));
            x_max = x_max.max(tx(x));
            y_min = y_min.min(ty(y));
            y_max = y_max.max(ty(y));
        }
    }
    if !x_min.is_finite() || x_max <= x_min {
        x_max = x_min + 1.0;
    }
    if !y_min.is_finite() || y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let pad = 0.03 * (y_max - y_min);
    let (y_min, y_max) = (y_min - pad, y_max + pad);

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| MARGIN_T + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // axes
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_L}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN_B
    );

    // ticks
    for (frac, value) in ticks(x_min, x_max) {
        let x = MARGIN_L + frac * plot_w;
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#,
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_B + 18.0,
            format_tick(value, false)
        );
    }
    for (frac, value) in ticks(y_min, y_max) {
        let yy = MARGIN_T + (1.0 - frac) * plot_h;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{yy}" x2="{MARGIN_L}" y2="{yy}" stroke="black"/>"#,
            MARGIN_L - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            MARGIN_L - 8.0,
            yy + 4.0,
            format_tick(value, log_y)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_L}" y1="{yy}" x2="{}" y2="{yy}" stroke="#dddddd"/>"##,
            WIDTH - MARGIN_R
        );
    }

    // series
    for s in series {
        let mut path = String::new();
        for &(x, y) in &s.points {
            let _ = write!(path, "{:.2},{:.2} ", px(tx(x)), py(ty(y)));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.6"/>"#,
            path.trim_end(),
            s.color
        );
    }

    // legend
    for (i, s) in series.iter().enumerate() {
        let ly = MARGIN_T + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN_R - 170.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/>"#,
            lx + 22.0,
            s.color
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12">{}</text>"#,
            lx + 28.0,
            ly + 4.0,
            escape(&s.name)
        );
    }

    // labels
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(y_label)
    );
    svg.push_str("</svg>\n");
    svg
}

/// Five evenly spaced ticks as (fraction, value-at-fraction).
fn ticks(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    (0..=4).map(|i| { let f = i as f64 / 4.0; (f, lo + f * (hi - lo)) }).collect()
}

fn format_tick(v: f64, log_axis: bool) -> String {
    if log_axis {
        format!("1e{v:.1}")
    } else if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
