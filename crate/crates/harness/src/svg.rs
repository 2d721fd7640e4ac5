//! Minimal static SVG renderings of line series and heatmaps.

use std::fmt::Write;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn line_plot(title: &str, series: &[Series]) -> String {
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = write!(out, r#"<text x="{}" y="16" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = write!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = write!(out, r#"<text x="{MARGIN}" y="{}">{x0:.3}</text>"#, HEIGHT - MARGIN + 14.0);
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">{x1:.3}</text>"#,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 14.0
    );
    let _ = write!(out, r#"<text x="2" y="{}">{y1:.3}</text>"#, MARGIN + 4.0);
    let _ = write!(out, r#"<text x="2" y="{}">{y0:.3}</text>"#, HEIGHT - MARGIN);
    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = write!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * i as f64 + 10.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn heatmap(title: &str, values: &ndarray::Array2<f64>) -> String {
    let (rows, cols) = values.dim();
    let max = values.iter().cloned().fold(0.0, f64::max).max(1e-300);
    let cell = ((WIDTH - 2.0 * MARGIN) / cols.max(1) as f64).min((HEIGHT - 2.0 * MARGIN) / rows.max(1) as f64);
    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = write!(out, r#"<text x="{}" y="16" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    for ((r, c), &v) in values.indexed_iter() {
        let shade = (255.0 * (1.0 - (v / max).clamp(0.0, 1.0))).round() as u8;
        let _ = write!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{cell:.2}" height="{cell:.2}" fill="rgb({shade},{shade},255)"/>"#,
            MARGIN + c as f64 * cell,
            MARGIN + r as f64 * cell
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_wellformed_roots() {
        let s = line_plot(
            "a < b",
            &[Series {
                label: "x",
                points: vec![(0.0, 1.0), (1.0, 2.0)],
            }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("a &lt; b"));
        let h = heatmap("g", &ndarray::array![[0.0, 1.0], [0.5, 0.25]]);
        assert_eq!(h.matches("<rect").count(), 4);
    }
}
