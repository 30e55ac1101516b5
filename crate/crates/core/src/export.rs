//! File export: CSV and JSON at full (round-trippable) precision, and
//! deterministic SVG line plots with the plotted data embedded as a comment
//! block so the artifacts are diffable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// 17 significant digits: enough to reproduce any f64 exactly on parse.
pub fn format_full(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn export_csv(path: &Path, headers: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut text = String::new();
    text.push_str(&headers.join(","));
    text.push('\n');
    for row in rows {
        if row.len() != headers.len() {
            return Err(Error::InvalidInput(format!(
                "row width {} does not match {} headers",
                row.len(),
                headers.len()
            )));
        }
        let cells: Vec<String> = row.iter().map(|&x| format_full(x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let headers = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty csv".into()))?
        .split(',')
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| Error::InvalidInput(format!("bad csv cell: {e}")))?);
    }
    Ok((headers, rows))
}

pub fn export_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlotStyle {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Deterministic standalone SVG: same input, byte-identical output.
/// Single-point series are drawn as markers.
pub fn export_plot(path: &Path, style: &PlotStyle, series: &[Series]) -> Result<()> {
    if series.is_empty() || series.iter().any(|s| s.points.is_empty()) {
        return Err(Error::InvalidInput("plot needs nonempty series".into()));
    }
    let all = series.iter().flat_map(|s| &s.points);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    // degenerate ranges (e.g. a single point) get a unit window around them
    if x1 - x0 < f64::MIN_POSITIVE {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < f64::MIN_POSITIVE {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    svg.push_str("<!-- data\nseries,x,y\n");
    for s in series {
        for &(x, y) in &s.points {
            let _ = writeln!(svg, "{},{},{}", s.name, format_full(x), format_full(y));
        }
    }
    svg.push_str("-->\n");
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        style.title
    );
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{:.4}</text>",
            sx(xv),
            HEIGHT - MARGIN + 18.0,
            xv
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{:.4}</text>",
            MARGIN - 6.0,
            sy(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>",
        WIDTH / 2.0,
        HEIGHT - 12.0,
        style.x_label
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 {})\">{}</text>",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        style.y_label
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.points.len() == 1 {
            let (x, y) = s.points[0];
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"4\" fill=\"{color}\"/>",
                sx(x),
                sy(y)
            );
        } else {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                pts.join(" ")
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{}</text>",
            WIDTH - MARGIN + 6.0,
            MARGIN + 16.0 * i as f64,
            s.name
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}
