//! Minimal SVG line charts (no external plotting dependency).
//!
//! Renders one or more named series as polylines over a linear x axis and
//! a base-10 logarithmic y axis — enough for recovery-error-vs-samples
//! curves. Output is a standalone `<svg>` document with axes, tick labels,
//! gridlines, and a legend.

use crate::{Error, Result};
use std::fmt::Write as _;

/// One named curve; `points` are `(x, y)` with `y > 0` required on the
/// log axis (non-finite or non-positive points are dropped with a count).
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Chart-level options.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Vertical guide lines drawn at these x positions (e.g. sample-count
    /// thresholds worth calling out).
    pub x_guides: Vec<f64>,
    pub width: u32,
    pub height: u32,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            title: String::new(),
            x_label: "x".into(),
            y_label: "y".into(),
            x_guides: Vec::new(),
            width: 760,
            height: 480,
        }
    }
}

const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Renders `series` to an SVG document with a log-scale y axis.
pub fn render_log_y(spec: &PlotSpec, series: &[Series]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidConfig("plot needs at least one series".into()));
    }
    let mut dropped = 0usize;
    let mut xs: Vec<f64> = Vec::new();
    let mut logs: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() && y > 0.0 {
                xs.push(x);
                logs.push(y.log10());
            } else {
                dropped += 1;
            }
        }
    }
    if xs.is_empty() {
        return Err(Error::InvalidConfig(
            "plot has no positive finite points for the log axis".into(),
        ));
    }
    let (x_min, x_max) = expand_range(min_of(&xs), max_of(&xs), 0.02);
    // snap the log range outward to whole decades so ticks are 10^k
    let y_lo = min_of(&logs).floor();
    let y_hi = max_of(&logs).ceil();
    let (y_lo, y_hi) = if y_lo == y_hi { (y_lo - 1.0, y_hi + 1.0) } else { (y_lo, y_hi) };

    let w = spec.width as f64;
    let h = spec.height as f64;
    let plot_w = w - MARGIN_L - MARGIN_R;
    let plot_h = h - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |ly: f64| MARGIN_T + (y_hi - ly) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"Helvetica, Arial, sans-serif\">\n"
    );
    let _ = write!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n");
    if !spec.title.is_empty() {
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            w / 2.0,
            escape(&spec.title)
        );
    }

    // horizontal gridlines + y tick labels at each decade
    let mut k = y_lo as i64;
    while k <= y_hi as i64 {
        let y = sy(k as f64);
        let _ = write!(
            svg,
            "<line x1=\"{MARGIN_L:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_L + plot_w
        );
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">1e{k}</text>\n",
            MARGIN_L - 8.0,
            y + 3.5
        );
        k += 1;
    }

    // x ticks: about six round positions
    for t in linear_ticks(x_min, x_max, 6) {
        let x = sx(t);
        let _ = write!(
            svg,
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" \
             stroke=\"#000000\" stroke-width=\"1\"/>\n",
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0
        );
        let _ = write!(
            svg,
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            MARGIN_T + plot_h + 18.0,
            format_tick(t)
        );
    }

    // guide lines
    for &g in &spec.x_guides {
        if g >= x_min && g <= x_max {
            let x = sx(g);
            let _ = write!(
                svg,
                "<line x1=\"{x:.1}\" y1=\"{MARGIN_T:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" \
                 stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n",
                MARGIN_T + plot_h
            );
        }
    }

    // axes
    let _ = write!(
        svg,
        "<rect x=\"{MARGIN_L:.1}\" y=\"{MARGIN_T:.1}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
         fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>\n"
    );
    let _ = write!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        h - 14.0,
        escape(&spec.x_label)
    );
    let _ = write!(
        svg,
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(&spec.y_label)
    );

    // series polylines + point markers
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() && y > 0.0 {
                let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y.log10()));
            }
        }
        if !path.is_empty() {
            let _ = write!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                path.trim_end()
            );
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() && y > 0.0 {
                    let _ = write!(
                        svg,
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.6\" fill=\"{color}\"/>\n",
                        sx(x),
                        sy(y.log10())
                    );
                }
            }
        }
    }

    // legend, top-right inside the plot area
    let legend_x = MARGIN_L + plot_w - 190.0;
    let mut legend_y = MARGIN_T + 14.0;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            svg,
            "<line x1=\"{legend_x:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>\n",
            legend_y - 4.0,
            legend_x + 22.0,
            legend_y - 4.0
        );
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{legend_y:.1}\" font-size=\"12\">{}</text>\n",
            legend_x + 28.0,
            escape(&s.label)
        );
        legend_y += 16.0;
    }
    if dropped > 0 {
        let _ = write!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" fill=\"#777777\">{} non-positive point(s) omitted</text>\n",
            MARGIN_L + 4.0,
            MARGIN_T + plot_h - 6.0,
            dropped
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn expand_range(lo: f64, hi: f64, frac: f64) -> (f64, f64) {
    if lo == hi {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = (hi - lo) * frac;
    (lo - pad, hi + pad)
}

/// Round tick positions: step = {1,2,5}·10^k chosen so roughly `target`
/// ticks fit.
fn linear_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / target.max(2) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.5 {
        1.0
    } else if norm <= 3.0 {
        2.0
    } else if norm <= 7.0 {
        5.0
    } else {
        10.0
    } * mag;
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        // avoid "-0"
        out.push(if t == 0.0 { 0.0 } else { t });
        t += step;
    }
    out
}

fn format_tick(t: f64) -> String {
    if t == t.trunc() && t.abs() < 1e7 {
        format!("{}", t as i64)
    } else {
        format!("{t}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_series() -> Vec<Series> {
        vec![
            Series {
                label: "solver a".into(),
                points: (1..=10).map(|i| (10.0 * i as f64, 10f64.powi(-i))).collect(),
            },
            Series {
                label: "solver b".into(),
                points: (1..=10).map(|i| (10.0 * i as f64, 0.5)).collect(),
            },
        ]
    }

    #[test]
    fn renders_well_formed_svg() {
        let spec = PlotSpec {
            title: "demo".into(),
            x_label: "samples".into(),
            y_label: "error".into(),
            x_guides: vec![55.0],
            ..Default::default()
        };
        let svg = render_log_y(&spec, &demo_series()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("solver a"));
        assert!(svg.contains("1e-10"));
        assert!(svg.contains("stroke-dasharray")); // the guide line
    }

    #[test]
    fn drops_nonpositive_points_with_note() {
        let series = vec![Series {
            label: "mixed".into(),
            points: vec![(1.0, 1.0), (2.0, 0.0), (3.0, -2.0), (4.0, f64::NAN), (5.0, 1e-3)],
        }];
        let svg = render_log_y(&PlotSpec::default(), &series).unwrap();
        assert!(svg.contains("3 non-positive point(s) omitted"));
    }

    #[test]
    fn rejects_empty_and_all_invalid() {
        assert!(render_log_y(&PlotSpec::default(), &[]).is_err());
        let series = vec![Series {
            label: "bad".into(),
            points: vec![(1.0, 0.0)],
        }];
        assert!(render_log_y(&PlotSpec::default(), &series).is_err());
    }

    #[test]
    fn tick_positions_are_round() {
        let t = linear_ticks(0.0, 130.0, 6);
        assert_eq!(t, vec![0.0, 20.0, 40.0, 60.0, 80.0, 100.0, 120.0]);
        let t = linear_ticks(7.0, 23.0, 6);
        assert!(t.iter().all(|v| (v / 2.0).fract() == 0.0 || (v / 5.0).fract() == 0.0));
    }

    #[test]
    fn escapes_labels() {
        let series = vec![Series {
            label: "a<b & c".into(),
            points: vec![(0.0, 1.0), (1.0, 2.0)],
        }];
        let svg = render_log_y(&PlotSpec::default(), &series).unwrap();
        assert!(svg.contains("a&lt;b &amp; c"));
    }
}
