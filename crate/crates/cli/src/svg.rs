//! Static SVG line charts of `tau` against `alpha`.

use std::fmt::Write as _;

use osc_time_core::SweepRow;

use crate::error::CliError;
use crate::table::num;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// One curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Splits sorted rows into one `tau` series per `x0`, labelled `x0=<value>`
/// with `suffix` appended.
pub fn series_from_rows(rows: &[SweepRow], suffix: &str) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some(s) if s.label == label(r.x0, suffix) => s.points.push((r.alpha, r.tau)),
            _ => out.push(Series {
                label: label(r.x0, suffix),
                points: vec![(r.alpha, r.tau)],
            }),
        }
    }
    out
}

fn label(x0: f64, suffix: &str) -> String {
    format!("x0={}{suffix}", num(x0))
}

/// The linear oscillation time sampled at every distinct `alpha` in `rows`.
pub fn reference_from_rows(rows: &[SweepRow]) -> Option<Series> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.tau_linear.is_finite())
        .map(|r| (r.alpha, r.tau_linear))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    (pts.len() >= 2).then(|| Series {
        label: "tau_l (linear)".into(),
        points: pts,
    })
}

/// Tick positions covering `[lo, hi]` with a 1-2-5 step.
pub fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    // strip representation noise such as 0.30000000000000004
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn finite_points(s: &Series) -> impl Iterator<Item = &(f64, f64)> {
    s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite())
}

/// Renders the curves, with `reference` drawn dashed.
///
/// Every series needs at least two finite points.
pub fn render(series: &[Series], reference: Option<&Series>) -> Result<String, CliError> {
    if series.is_empty() {
        return Err(CliError::Usage("nothing to plot".into()));
    }
    for s in series {
        if finite_points(s).count() < 2 {
            return Err(CliError::Usage(format!(
                "series {} needs at least two finite alpha values",
                s.label
            )));
        }
    }
    let all = || series.iter().chain(reference).flat_map(finite_points);
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all() {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if x_hi == x_lo {
        return Err(CliError::Usage("all points share one alpha value".into()));
    }
    if y_hi == y_lo {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;
    let fmt = |v: f64| format!("{:.2}", v);

    let mut s = String::new();
    let w = &mut s;
    // writing into a String cannot fail
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fmt(LEFT),
        fmt(TOP),
        fmt(plot_w),
        fmt(plot_h)
    );

    let _ = writeln!(w, r#"<g class="axis x">"#);
    for t in ticks(x_lo, x_hi, 8) {
        let x = fmt(px(t));
        let y0 = TOP + plot_h;
        let _ = writeln!(
            w,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#,
            fmt(y0),
            fmt(y0 + 5.0)
        );
        let _ = writeln!(
            w,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            fmt(y0 + 18.0),
            tick_label(t)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle">alpha</text>"#,
        fmt(LEFT + plot_w / 2.0),
        fmt(HEIGHT - 10.0)
    );
    let _ = writeln!(w, "</g>");

    let _ = writeln!(w, r#"<g class="axis y">"#);
    for t in ticks(y_lo, y_hi, 6) {
        let y = fmt(py(t));
        let _ = writeln!(
            w,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#,
            fmt(LEFT - 5.0),
            fmt(LEFT)
        );
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            fmt(LEFT - 8.0),
            tick_label(t)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">tau</text>"#,
        fmt(TOP + plot_h / 2.0),
        fmt(TOP + plot_h / 2.0)
    );
    let _ = writeln!(w, "</g>");

    let polyline = |w: &mut String, s: &Series, class: &str, style: &str| {
        let pts: Vec<String> = finite_points(s)
            .map(|&(x, y)| format!("{},{}", fmt(px(x)), fmt(py(y))))
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline class="{class}" fill="none" {style} points="{}"/>"#,
            pts.join(" ")
        );
    };
    if let Some(r) = reference {
        polyline(
            w,
            r,
            "reference",
            r#"stroke="gray" stroke-dasharray="6,4" stroke-width="1.5""#,
        );
    }
    for (i, ser) in series.iter().enumerate() {
        let style = format!(r#"stroke="{}" stroke-width="2""#, PALETTE[i % PALETTE.len()]);
        polyline(w, ser, "series", &style);
    }

    let _ = writeln!(w, r#"<g class="legend">"#);
    let lx = WIDTH - RIGHT + 15.0;
    let entries = series
        .iter()
        .enumerate()
        .map(|(i, s)| (s.label.as_str(), PALETTE[i % PALETTE.len()], ""))
        .chain(reference.map(|r| (r.label.as_str(), "gray", r#" stroke-dasharray="6,4""#)));
    for (i, (text, color, dash)) in entries.enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            w,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"{dash}/>"#,
            fmt(lx),
            fmt(y),
            fmt(lx + 25.0),
            fmt(y)
        );
        let _ = writeln!(
            w,
            r#"<text x="{}" y="{}" dominant-baseline="middle">{}</text>"#,
            fmt(lx + 32.0),
            fmt(y),
            escape(text)
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
