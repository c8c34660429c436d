//! Minimal hand-written SVG plots. Coordinates are printed with fixed
//! precision so files are byte-stable.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 440.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub line: bool,
}

/// Points drawn as diamonds on top of the series.
pub struct Markers {
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(iter: impl Iterator<Item = (f64, f64)>) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in iter {
        b.0 = b.0.min(x);
        b.1 = b.1.max(x);
        b.2 = b.2.min(y);
        b.3 = b.3.max(y);
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if b.1 - b.0 < 1e-300 {
        b.0 -= 0.5;
        b.1 += 0.5;
    }
    if b.3 - b.2 < 1e-12 * b.3.abs().max(1.0) {
        let pad = 0.5 * b.3.abs().max(1.0);
        b.2 -= pad;
        b.3 += pad;
    } else {
        let pad = 0.05 * (b.3 - b.2);
        b.2 -= pad;
        b.3 += pad;
    }
    b
}

fn header(s: &mut String, w: f64, h: f64, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        w / 2.0,
        escape(title)
    );
}

/// Line/scatter plot with axes, ticks and a legend.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], markers: &[Markers]) -> String {
    let all = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .chain(markers.iter().flat_map(|m| m.points.iter().copied()));
    let (x0, x1, y0, y1) = bounds(all);
    let pw = W - ML - MR;
    let ph = H - MT - MB;
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MT + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    header(&mut s, W, H, title);
    let _ = writeln!(
        s,
        r#"<rect x="{ML:.1}" y="{MT:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
    );
    for t in 0..=5 {
        let fx = x0 + (x1 - x0) * t as f64 / 5.0;
        let fy = y0 + (y1 - y0) * t as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            H - MB + 16.0,
            tick(fx)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            ML - 6.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        ML + pw / 2.0,
        H - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        MT + ph / 2.0,
        MT + ph / 2.0,
        escape(ylabel)
    );

    for (k, ser) in series.iter().enumerate() {
        if ser.line && ser.points.len() > 1 {
            let pts: Vec<String> = ser
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                ser.color,
                pts.join(" ")
            );
        }
        for &(x, y) in &ser.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
                sx(x),
                sy(y),
                ser.color
            );
        }
        if !ser.label.is_empty() && series.len() <= 12 {
            let ly = MT + 14.0 + 14.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{ly:.1}" fill="{}" text-anchor="end">{}</text>"#,
                W - MR - 6.0,
                ser.color,
                escape(&ser.label)
            );
        }
    }
    for m in markers {
        for &(x, y) in &m.points {
            let (cx, cy) = (sx(x), sy(y));
            let _ = writeln!(
                s,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{}" stroke="black"/>"#,
                cx,
                cy - 6.0,
                cx + 6.0,
                cy,
                cx,
                cy + 6.0,
                cx - 6.0,
                cy,
                m.color
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Geometry of a heatmap of box values with `nx × ny` cells (x fastest).
pub struct Heatmap<'a> {
    pub title: &'a str,
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub values: &'a [f64],
    /// Polylines drawn on top, in data coordinates.
    pub overlay: &'a [Vec<[f64; 2]>],
    /// Jumps longer than this in x break an overlay polyline (periodic seams).
    pub seam: Option<f64>,
}

/// Per-cell rectangles coloured white → dark blue over `[min(0, ·), max]`.
pub fn heatmap(h: &Heatmap<'_>) -> String {
    let pw = W - ML - MR;
    let ph = pw * (h.y_range.1 - h.y_range.0) / (h.x_range.1 - h.x_range.0);
    let total_h = MT + ph + MB;
    let sx = |x: f64| ML + (x - h.x_range.0) / (h.x_range.1 - h.x_range.0) * pw;
    let sy = |y: f64| MT + (h.y_range.1 - y) / (h.y_range.1 - h.y_range.0) * ph;
    let lo = h.values.iter().copied().fold(0.0f64, f64::min);
    let hi = h.values.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(lo + 1e-300);
    let cw = pw / h.nx as f64;
    let ch = ph / h.ny as f64;

    let mut s = String::new();
    header(&mut s, W, total_h, h.title);
    for j in 0..h.ny {
        for i in 0..h.nx {
            let v = h.values[j * h.nx + i];
            let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            let r = (255.0 * (1.0 - 0.85 * t)).round() as u8;
            let g = (255.0 * (1.0 - 0.7 * t)).round() as u8;
            let b = (255.0 * (1.0 - 0.3 * t)).round() as u8;
            let _ = writeln!(
                s,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                ML + i as f64 * cw,
                MT + ph - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    for line in h.overlay {
        let mut pieces: Vec<Vec<[f64; 2]>> = vec![Vec::new()];
        for (k, p) in line.iter().enumerate() {
            if k > 0 {
                if let Some(seam) = h.seam {
                    if (p[0] - line[k - 1][0]).abs() > seam {
                        pieces.push(Vec::new());
                    }
                }
            }
            pieces.last_mut().unwrap().push(*p);
        }
        for piece in pieces.iter().filter(|p| p.len() > 1) {
            let pts: Vec<String> = piece
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1])))
                .collect();
            let _ = writeln!(
                s,
                r##"<polyline fill="none" stroke="#d62728" stroke-width="1.5" points="{}"/>"##,
                pts.join(" ")
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{ML:.1}" y="{MT:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
    );
    s.push_str("</svg>\n");
    s
}
