//! Byte-deterministic SVG plot of several closed curves.

use std::fmt::Write;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const MARGIN: f64 = 40.0;

pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Curves drawn in a square data window centred on the origin, with both
/// axes and a legend. All coordinates are printed with three decimals.
pub fn plot(curves: &[Curve], width: u32, height: u32, x_label: &str, y_label: &str) -> String {
    let (w, h) = (width as f64, height as f64);
    let extent = curves
        .iter()
        .flat_map(|c| c.points.iter())
        .map(|&(x, y)| x.abs().max(y.abs()))
        .fold(0.0f64, f64::max);
    // Round the half-width up to a tidy value so that small changes in the
    // data do not move the axes.
    let half = if extent > 0.0 { (extent * 1.1 * 4.0).ceil() / 4.0 } else { 1.0 };
    let scale = ((w - 2.0 * MARGIN) / (2.0 * half)).min((h - 2.0 * MARGIN) / (2.0 * half));
    let (cx, cy) = (w / 2.0, h / 2.0);
    let map = |x: f64, y: f64| (cx + scale * x, cy - scale * y);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let (x0, _) = map(-half, 0.0);
    let (x1, _) = map(half, 0.0);
    let (_, y0) = map(0.0, half);
    let (_, y1) = map(0.0, -half);
    let _ = writeln!(
        s,
        r##"<g stroke="#888888" stroke-width="1"><line x1="{x0:.3}" y1="{cy:.3}" x2="{x1:.3}" y2="{cy:.3}"/><line x1="{cx:.3}" y1="{y0:.3}" x2="{cx:.3}" y2="{y1:.3}"/></g>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{x_label}</text>"#,
        x1 - 20.0,
        cy - 6.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{y_label}</text>"#,
        cx + 6.0,
        y0 + 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="10">{half}</text>"#,
        x1 - 16.0,
        cy + 14.0
    );
    for (k, curve) in curves.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut pts = String::new();
        for (i, &(x, y)) in curve.points.iter().chain(curve.points.first()).enumerate() {
            let (px, py) = map(x, y);
            if i > 0 {
                pts.push(' ');
            }
            let _ = write!(pts, "{px:.3},{py:.3}");
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>"#);
    }
    let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="12">"#);
    for (k, curve) in curves.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let y = 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="10" y1="{:.3}" x2="30" y2="{:.3}" stroke="{colour}" stroke-width="2"/><text x="36" y="{:.3}">{}</text>"#,
            y - 4.0,
            y - 4.0,
            y,
            curve.label
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
