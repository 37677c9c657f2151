//! Minimal static SVG line plots; no display server involved.

use std::path::Path;

use rshe_core::{Error, Result};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Writes a line plot of the given series; log-scales an axis when every
/// coordinate on it is positive and spans more than two decades.
pub fn write_line_plot(path: &Path, title: &str, series: &[Series]) -> Result<()> {
    let (w, h) = (720.0, 420.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);

    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if all.is_empty() {
        return Err(Error::Config("nothing to plot".to_string()));
    }
    let log_x = axis_wants_log(all.iter().map(|p| p.0));
    let log_y = axis_wants_log(all.iter().map(|p| p.1));
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };

    let xs: Vec<f64> = all.iter().map(|p| tx(p.0)).collect();
    let ys: Vec<f64> = all.iter().map(|p| ty(p.1)).collect();
    let (x0, x1) = span(&xs);
    let (y0, y1) = span(&ys);
    let px = |v: f64| ml + (tx(v) - x0) / (x1 - x0) * (w - ml - mr);
    let py = |v: f64| h - mb - (ty(v) - y0) / (y1 - y0) * (h - mt - mb);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n<text x=\"{}\" y=\"24\" \
         font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        w / 2.0,
        escape(title)
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb,
        h - mb
    ));
    for (anchor, value, x, y) in [
        ("start", x0, ml, h - mb + 18.0),
        ("end", x1, w - mr, h - mb + 18.0),
    ] {
        let shown = if log_x { 10f64.powf(value) } else { value };
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"{anchor}\">{shown:.4}</text>\n"
        ));
    }
    for (value, y) in [(y0, h - mb), (y1, mt + 4.0)] {
        let shown = if log_y { 10f64.powf(value) } else { value };
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{shown:.4e}</text>\n",
            ml - 6.0
        ));
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| {
                (!log_x || *x > 0.0) && (!log_y || *y > 0.0) && x.is_finite() && y.is_finite()
            })
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect();
        if pts.len() >= 2 {
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            w - mr - 180.0,
            mt + 16.0 * (i as f64 + 1.0),
            escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn axis_wants_log(values: impl Iterator<Item = f64> + Clone) -> bool {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for v in values.clone() {
        if v <= 0.0 {
            return false;
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi / lo > 100.0
}

fn span(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo).abs() < 1e-300 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
