//! Minimal self-contained SVG plotting: scatter, line, and histogram layers
//! with linear or logarithmic axes. Output is a single `<svg>` document with
//! no external references.

use std::fmt::Write as _;

const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 46.0;

#[derive(Clone, Debug)]
pub struct Figure {
    pub width: f64,
    pub height: f64,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            width: 560.0,
            height: 400.0,
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_log: false,
            y_log: false,
        }
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn log_log(mut self) -> Self {
        self.x_log = true;
        self.y_log = true;
        self
    }
}

#[derive(Clone, Debug)]
pub enum Layer {
    Scatter { points: Vec<(f64, f64)>, color: String, radius: f64, label: String },
    Line { points: Vec<(f64, f64)>, color: String, dashed: bool, label: String },
    /// Bins as (left_edge, right_edge, height).
    Histogram { bins: Vec<(f64, f64, f64)>, color: String, label: String },
}

fn layer_points(layer: &Layer) -> Vec<(f64, f64)> {
    match layer {
        Layer::Scatter { points, .. } | Layer::Line { points, .. } => points.clone(),
        Layer::Histogram { bins, .. } => bins
            .iter()
            .flat_map(|&(l, r, h)| [(l, 0.0), (r, h)])
            .collect(),
    }
}

fn nice_ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let (a, b) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
        return (a..=b).map(|e| 10f64.powi(e)).filter(|t| *t >= lo && *t <= hi).collect();
    }
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(mag);
    let start = (lo / step).ceil() * step;
    let mut t = start;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(t);
        t += step;
    }
    out
}

fn fmt_tick(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{x:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() { "0".into() } else { s }
    } else {
        format!("{x:.1e}")
    }
}

/// Render the figure with its layers to an SVG document.
pub fn render(fig: &Figure, layers: &[Layer]) -> String {
    let mut pts: Vec<(f64, f64)> = layers.iter().flat_map(|l| layer_points(l)).collect();
    pts.retain(|(x, y)| {
        x.is_finite() && y.is_finite() && (!fig.x_log || *x > 0.0) && (!fig.y_log || *y > 0.0)
    });
    let (mut x_lo, mut x_hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (x, _)| (a.min(*x), b.max(*x)));
    let (mut y_lo, mut y_hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (_, y)| (a.min(*y), b.max(*y)));
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
        (y_lo, y_hi) = (0.0, 1.0);
    }
    if x_lo == x_hi {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_lo == y_hi {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    // pad 4%
    if fig.x_log {
        let f = (x_hi / x_lo).powf(0.04);
        x_lo /= f;
        x_hi *= f;
    } else {
        let p = 0.04 * (x_hi - x_lo);
        x_lo -= p;
        x_hi += p;
    }
    if fig.y_log {
        let f = (y_hi / y_lo).powf(0.04);
        y_lo /= f;
        y_hi *= f;
    } else {
        let p = 0.04 * (y_hi - y_lo);
        y_lo -= p;
        y_hi += p;
    }

    let plot_w = fig.width - MARGIN_L - MARGIN_R;
    let plot_h = fig.height - MARGIN_T - MARGIN_B;
    let tx = |x: f64| -> f64 {
        let u = if fig.x_log {
            (x.ln() - x_lo.ln()) / (x_hi.ln() - x_lo.ln())
        } else {
            (x - x_lo) / (x_hi - x_lo)
        };
        MARGIN_L + u * plot_w
    };
    let ty = |y: f64| -> f64 {
        let u = if fig.y_log {
            (y.ln() - y_lo.ln()) / (y_hi.ln() - y_lo.ln())
        } else {
            (y - y_lo) / (y_hi - y_lo)
        };
        MARGIN_T + (1.0 - u) * plot_h
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = fig.width,
        h = fig.height
    );
    let _ = writeln!(s, r#"<rect width="{}" height="{}" fill="white"/>"#, fig.width, fig.height);
    // frame
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    // title and axis labels
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        escape(&fig.title)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        fig.height - 10.0,
        escape(&fig.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(&fig.y_label)
    );
    // ticks
    for t in nice_ticks(x_lo, x_hi, fig.x_log) {
        let x = tx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0,
            MARGIN_T + plot_h + 20.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y_lo, y_hi, fig.y_log) {
        let y = ty(t);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN_L - 5.0,
            MARGIN_L,
            MARGIN_L - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    // layers
    let clip = |v: f64, lo: f64, hi: f64| v.clamp(lo, hi);
    for layer in layers {
        match layer {
            Layer::Scatter { points, color, radius, .. } => {
                for &(x, y) in points {
                    if !x.is_finite() || !y.is_finite() {
                        continue;
                    }
                    if (fig.x_log && x <= 0.0) || (fig.y_log && y <= 0.0) {
                        continue;
                    }
                    if x < x_lo || x > x_hi || y < y_lo || y > y_hi {
                        continue;
                    }
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{color}" fill-opacity="0.6"/>"#,
                        tx(x),
                        ty(y)
                    );
                }
            }
            Layer::Line { points, color, dashed, .. } => {
                let path: Vec<String> = points
                    .iter()
                    .filter(|(x, y)| {
                        x.is_finite()
                            && y.is_finite()
                            && (!fig.x_log || *x > 0.0)
                            && (!fig.y_log || *y > 0.0)
                    })
                    .map(|&(x, y)| {
                        format!(
                            "{:.2},{:.2}",
                            clip(tx(x), MARGIN_L, MARGIN_L + plot_w),
                            clip(ty(y), MARGIN_T, MARGIN_T + plot_h)
                        )
                    })
                    .collect();
                if path.len() >= 2 {
                    let dash = if *dashed { r#" stroke-dasharray="6,4""# } else { "" };
                    let _ = writeln!(
                        s,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                        path.join(" ")
                    );
                }
            }
            Layer::Histogram { bins, color, .. } => {
                for &(l, r, h) in bins {
                    if h <= 0.0 {
                        continue;
                    }
                    let x0 = clip(tx(l), MARGIN_L, MARGIN_L + plot_w);
                    let x1 = clip(tx(r), MARGIN_L, MARGIN_L + plot_w);
                    let y0 = ty(if fig.y_log { y_lo } else { 0.0f64.max(y_lo) });
                    let y1 = clip(ty(h), MARGIN_T, MARGIN_T + plot_h);
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.5" stroke="{color}"/>"#,
                        x0,
                        y1,
                        (x1 - x0).max(0.5),
                        (y0 - y1).max(0.0)
                    );
                }
            }
        }
    }
    // legend
    let labels: Vec<(&str, &str)> = layers
        .iter()
        .filter_map(|l| match l {
            Layer::Scatter { label, color, .. }
            | Layer::Line { label, color, .. }
            | Layer::Histogram { label, color, .. } => {
                if label.is_empty() { None } else { Some((label.as_str(), color.as_str())) }
            }
        })
        .collect();
    for (k, (label, color)) in labels.iter().enumerate() {
        let y = MARGIN_T + 14.0 + 16.0 * k as f64;
        let x = MARGIN_L + plot_w - 130.0;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            y - 9.0,
            x + 14.0,
            y,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Equal-width histogram bins of `values` as (left, right, density).
pub fn histogram(values: &[f64], n_bins: usize) -> Vec<(f64, f64, f64)> {
    if values.is_empty() || n_bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let w = span / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let k = (((v - lo) / w) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let norm = 1.0 / (values.len() as f64 * w);
    counts
        .iter()
        .enumerate()
        .map(|(k, &c)| (lo + k as f64 * w, lo + (k + 1) as f64 * w, c as f64 * norm))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_svg() {
        let fig = Figure::new("demo", "x", "y");
        let layers = vec![
            Layer::Scatter {
                points: vec![(0.0, 0.0), (1.0, 1.0), (0.5, 0.2)],
                color: "#1f77b4".into(),
                radius: 2.0,
                label: "data".into(),
            },
            Layer::Line {
                points: vec![(0.0, 0.0), (1.0, 1.0)],
                color: "#d62728".into(),
                dashed: true,
                label: "guide".into(),
            },
        ];
        let svg = render(&fig, &layers);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("circle"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn log_axes_skip_nonpositive() {
        let fig = Figure::new("log", "x", "y").log_log();
        let svg = render(
            &fig,
            &[Layer::Scatter {
                points: vec![(10.0, 1.0), (100.0, 0.1), (-1.0, 5.0)],
                color: "black".into(),
                radius: 2.0,
                label: String::new(),
            }],
        );
        // exactly the two positive points survive
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn histogram_is_normalized() {
        let values: Vec<f64> = (0..1000).map(|k| k as f64 / 1000.0).collect();
        let bins = histogram(&values, 20);
        let mass: f64 = bins.iter().map(|(l, r, h)| (r - l) * h).sum();
        assert!((mass - 1.0).abs() < 1e-9);
    }
}
