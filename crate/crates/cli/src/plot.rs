//! Standalone SVG charts drawn from output tables.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, desc: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<desc>{}</desc>", esc(desc));
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, esc(title));
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str) {
    let px = LEFT + (W - LEFT - RIGHT) / 2.0;
    let py = TOP + (H - TOP - BOTTOM) / 2.0;
    let _ = writeln!(out, r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#, H - 12.0, esc(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{py}" text-anchor="middle" transform="rotate(-90 16 {py})">{}</text>"#,
        esc(y_label)
    );
}

/// About five round tick values covering `[lo, hi]`.
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
    Both,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn new(name: &str, xs: &[f64], ys: &[f64], style: Style) -> Self {
        let points = xs
            .iter()
            .zip(ys)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(&x, &y)| (x, y))
            .collect();
        Self { name: name.to_string(), points, style }
    }
}

/// X-Y chart of one or more series with a legend on the right.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], desc: &str) -> String {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        match (lo.is_finite(), hi > lo) {
            (false, _) => (0.0, 1.0),
            (true, true) => {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
            (true, false) => (lo - 0.5 * lo.abs().max(1e-30), hi + 0.5 * hi.abs().max(1e-30)),
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    header(&mut out, title, desc);
    let _ = writeln!(out, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##);
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#333"/>"##, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(t));
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(out, r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#333"/>"##, LEFT - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, tick_label(t));
    }
    axis_labels(&mut out, x_label, y_label);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if matches!(s.style, Style::Line | Style::Both) && s.points.len() > 1 {
            let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
        }
        if matches!(s.style, Style::Markers | Style::Both) {
            for &(x, y) in &s.points {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
            }
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(out, r#"<rect x="{lx}" y="{}" width="12" height="4" fill="{color}"/>"#, ly - 4.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 18.0, ly + 2.0, esc(&s.name));
    }
    out.push_str("</svg>\n");
    out
}

/// Blue for -1, white for 0, red for +1.
pub fn diverging(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
    } else {
        (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Grid of colored cells, row 0 at the bottom. `None` cells stay blank.
pub struct Heatmap<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `colors[j * nx + i]`.
    pub colors: Vec<Option<String>>,
    /// Optional tick labels per column and per row.
    pub x_ticks: Vec<String>,
    pub y_ticks: Vec<String>,
    /// Legend entries `(color, text)`.
    pub legend: Vec<(String, String)>,
}

impl Heatmap<'_> {
    pub fn render(&self, desc: &str) -> String {
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        let cw = pw / self.nx.max(1) as f64;
        let ch = ph / self.ny.max(1) as f64;
        // Square cells when the grid is a picture of a device.
        let (cw, ch) = if self.x_ticks.is_empty() && self.y_ticks.is_empty() {
            let c = cw.min(ch);
            (c, c)
        } else {
            (cw, ch)
        };
        let mut out = String::new();
        header(&mut out, self.title, desc);
        for j in 0..self.ny {
            for i in 0..self.nx {
                if let Some(c) = &self.colors[j * self.nx + i] {
                    let x = LEFT + i as f64 * cw;
                    let y = TOP + (self.ny - 1 - j) as f64 * ch;
                    let _ = writeln!(
                        out,
                        r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{c}"/>"#,
                        cw + 0.01,
                        ch + 0.01
                    );
                }
            }
        }
        let gh = ch * self.ny as f64;
        for (i, t) in self.x_ticks.iter().enumerate() {
            let x = LEFT + (i as f64 + 0.5) * cw;
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + gh + 16.0, esc(t));
        }
        for (j, t) in self.y_ticks.iter().enumerate() {
            let y = TOP + (self.ny - 1 - j) as f64 * ch + ch / 2.0 + 4.0;
            let _ = writeln!(out, r#"<text x="{}" y="{y:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, esc(t));
        }
        axis_labels(&mut out, self.x_label, self.y_label);
        for (k, (c, text)) in self.legend.iter().enumerate() {
            let ly = TOP + 10.0 + 18.0 * k as f64;
            let lx = W - RIGHT + 12.0;
            let _ = writeln!(out, r##"<rect x="{lx}" y="{}" width="12" height="12" fill="{c}" stroke="#333"/>"##, ly - 9.0);
            let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 18.0, ly + 2.0, esc(text));
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_and_inside() {
        let t = ticks(0.13, 0.97);
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|v| (0.13..=0.97).contains(v)));
        assert!((t[0] - 0.2).abs() < 1e-12);
        assert_eq!(ticks(1.0, 1.0), vec![1.0]);
    }

    #[test]
    fn charts_are_well_formed() {
        let s = Series::new("a<b", &[0.0, 1.0, f64::NAN], &[1.0, 2.0, 3.0], Style::Both);
        assert_eq!(s.points.len(), 2);
        let svg = line_chart("t", "x", "y", &[s], "cfg & more");
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b") && svg.contains("cfg &amp; more"));
        assert_eq!(diverging(1.0), "#ff0000");
        assert_eq!(diverging(-1.0), "#0000ff");
        assert_eq!(diverging(0.0), "#ffffff");
    }
}
