//! Static SVG plots of error traces on a logarithmic axis.

use std::fmt::Write as _;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 30.0;
/// Errors are clamped to this floor before taking logarithms.
const FLOOR: f64 = 1e-6;

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
}

/// Renders `|ḟ − y|` per method against time, with a dashed line at `bound`.
pub fn error_plot_svg(title: &str, delta: f64, series: &[Series<'_>], bound: f64) -> String {
    let len = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let t_max = (len.saturating_sub(1) as f64 * delta).max(delta);
    let finite = series
        .iter()
        .flat_map(|s| s.values.iter())
        .copied()
        .filter(|v| v.is_finite());
    let hi = finite.fold(bound.max(FLOOR), f64::max);
    let (log_lo, log_hi) = (FLOOR.log10(), hi.log10().ceil().max(FLOOR.log10() + 1.0));

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let x = |t: f64| MARGIN_LEFT + t / t_max * plot_w;
    let y = |v: f64| {
        let lv = v.max(FLOOR).log10();
        MARGIN_Y + (log_hi - lv) / (log_hi - log_lo) * plot_h
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="18" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_Y}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for decade in (log_lo as i32)..=(log_hi as i32) {
        let yy = y(10f64.powi(decade));
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" x2="{}" y1="{yy:.2}" y2="{yy:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{decade}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            yy + 4.0
        );
    }
    let ticks = 5;
    for i in 0..=ticks {
        let t = t_max * i as f64 / ticks as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{t:.1}</text>"#,
            x(t),
            HEIGHT - 10.0
        );
    }
    let yb = y(bound);
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN_LEFT}" x2="{}" y1="{yb:.2}" y2="{yb:.2}" stroke="black" stroke-dasharray="6,4"/>"#,
        MARGIN_LEFT + plot_w
    );

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut points = String::new();
        for (k, v) in s.values.iter().enumerate() {
            if v.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", x(k as f64 * delta), y(*v));
            }
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            points.trim_end()
        );
        let ly = MARGIN_Y + 16.0 * (i as f64 + 1.0);
        let lx = MARGIN_LEFT + plot_w + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_polyline_per_series() {
        let a = [1.0, 0.1, 0.01, f64::NAN];
        let b = [0.5, 0.5, 0.0, 0.2];
        let svg = error_plot_svg(
            "a <b>",
            0.1,
            &[Series { label: "x", values: &a }, Series { label: "y", values: &b }],
            0.05,
        );
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt;b&gt;"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
