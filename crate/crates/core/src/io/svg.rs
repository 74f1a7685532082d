//! Standalone SVG scatter plots with per-group regression lines.
//!
//! Line opacity follows the fit's R², floored at [`MIN_LINE_OPACITY`].

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const MIN_LINE_OPACITY: f64 = 0.1;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub group: String,
    /// Vertical whisker `(low, high)`.
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupLine {
    pub group: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisLabels {
    pub x: String,
    pub y: String,
}

impl Default for AxisLabels {
    fn default() -> Self {
        Self {
            x: "probit(ID accuracy)".into(),
            y: "probit(OOD accuracy)".into(),
        }
    }
}

pub fn line_opacity(r2: f64) -> f64 {
    if r2.is_nan() {
        return MIN_LINE_OPACITY;
    }
    r2.clamp(MIN_LINE_OPACITY, 1.0)
}

fn num(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    if r == 0.0 {
        "0".into()
    } else {
        r.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo <= 0.0 {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

pub fn render_scatter_svg(points: &[ScatterPoint], lines: &[GroupLine], axes: &AxisLabels) -> Result<String> {
    if points.is_empty() {
        return Err(Error::invalid("scatter plot needs at least one point"));
    }
    if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::invalid("scatter points must be finite"));
    }
    let groups: Vec<&str> = points
        .iter()
        .map(|p| p.group.as_str())
        .chain(lines.iter().map(|l| l.group.as_str()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let color = |g: &str| PALETTE[groups.iter().position(|&x| x == g).unwrap_or(0) % PALETTE.len()];

    let (x0, x1) = padded_range(points.iter().map(|p| p.x));
    let (y0, y1) = padded_range(points.iter().flat_map(|p| {
        let (lo, hi) = p.ci.unwrap_or((p.y, p.y));
        [p.y, lo, hi]
    }));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} V{bottom} H{right}" fill="none" stroke="black"/>"#
    );
    for (i, (v, pos)) in [(x0, left), (x1, right)].into_iter().enumerate() {
        let anchor = if i == 0 { "start" } else { "end" };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="{anchor}">{}</text>"#,
            num(pos),
            num(bottom + 16.0),
            num(v)
        );
    }
    for (v, pos) in [(y0, bottom), (y1, top)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            num(left - 4.0),
            num(pos),
            num(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        num(WIDTH / 2.0),
        num(HEIGHT - 15.0),
        escape(&axes.x)
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{y}" font-size="13" text-anchor="middle" transform="rotate(-90 15 {y})">{}</text>"#,
        escape(&axes.y),
        y = num(HEIGHT / 2.0)
    );

    let _ = writeln!(
        s,
        r#"<clipPath id="plot"><rect x="{left}" y="{top}" width="{}" height="{}"/></clipPath>"#,
        right - left,
        bottom - top
    );
    for l in lines {
        let _ = writeln!(
            s,
            r#"<line class="fit" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2" stroke-opacity="{}" clip-path="url(#plot)"/>"#,
            num(sx(x0)),
            num(sy(l.slope * x0 + l.intercept)),
            num(sx(x1)),
            num(sy(l.slope * x1 + l.intercept)),
            color(&l.group),
            line_opacity(l.r2)
        );
    }
    for p in points {
        let c = color(&p.group);
        if let Some((lo, hi)) = p.ci {
            let _ = writeln!(
                s,
                r#"<line class="ci" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{c}"/>"#,
                num(sy(lo)),
                num(sy(hi)),
                x = num(sx(p.x))
            );
        }
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="4" fill="{c}"/>"#,
            num(sx(p.x)),
            num(sy(p.y))
        );
    }
    for (i, g) in groups.iter().enumerate() {
        let y = top + 8.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}" font-size="11">{}</text>"#,
            num(left + 10.0),
            num(y - 9.0),
            color(g),
            num(left + 24.0),
            num(y),
            escape(g)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_scatter_svg(
    points: &[ScatterPoint],
    lines: &[GroupLine],
    axes: &AxisLabels,
    out: impl AsRef<Path>,
) -> Result<()> {
    let svg = render_scatter_svg(points, lines, axes)?;
    super::write_file(out.as_ref(), svg)
}
