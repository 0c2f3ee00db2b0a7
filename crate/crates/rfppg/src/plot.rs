//! Minimal SVG line plots.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 300.0;
const MARGIN: f64 = 40.0;

pub struct Trace<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub values: &'a [f64],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Overlays traces sampled at `rate` on shared axes.
pub fn overlay_svg(title: &str, rate: f64, traces: &[Trace]) -> String {
    let n = traces.iter().map(|t| t.values.len()).max().unwrap_or(0).max(2);
    let finite = traces.iter().flat_map(|t| t.values.iter().copied()).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(lo < hi) {
        (lo, hi) = if lo.is_finite() { (lo - 1.0, lo + 1.0) } else { (-1.0, 1.0) };
    }
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let x = |i: usize| MARGIN + pw * i as f64 / (n - 1) as f64;
    let y = |v: f64| MARGIN + ph * (hi - v) / (hi - lo);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="gray"/>"#);
    let _ = writeln!(s, r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="11">0 s</text><text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{:.2} s</text>"#,
        HEIGHT - 22.0,
        WIDTH - MARGIN,
        HEIGHT - 22.0,
        (n - 1) as f64 / rate
    );
    for (k, t) in traces.iter().enumerate() {
        let mut pts = String::new();
        for (i, v) in t.values.iter().enumerate().filter(|(_, v)| v.is_finite()) {
            let _ = write!(pts, "{:.2},{:.2} ", x(i), y(*v));
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.2" points="{}"/>"#, t.color, pts.trim_end());
        let ly = MARGIN + 14.0 + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="11" fill="{}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 6.0,
            t.color,
            escape(t.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
