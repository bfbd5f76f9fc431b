//! Minimal static SVG line charts.
//!
//! Charts are standalone SVG 1.1 documents with inline styling only: no
//! scripts, no external fonts, no references outside the file. All
//! coordinates are formatted with fixed precision so identical inputs
//! render to identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 24.0;
const MARGIN_BOTTOM: f64 = 48.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One polyline with a legend label.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A chart description: series plus optional vertical interval whiskers
/// given as `(x, low, high)`.
pub struct ChartSpec {
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub whiskers: Vec<(f64, f64, f64)>,
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64) -> String {
    let text = format!("{v:.4}");
    let trimmed = text.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() {
        "0".to_string()
    } else {
        trimmed.to_string()
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(f64::MIN_POSITIVE);
        MARGIN_LEFT + (v - self.x_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(f64::MIN_POSITIVE);
        HEIGHT - MARGIN_BOTTOM - (v - self.y_min) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

/// Renders a chart to an SVG document string.
pub fn render(spec: &ChartSpec) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for series in &spec.series {
        for &(x, y) in &series.points {
            xs.push(x);
            ys.push(y);
        }
    }
    for &(x, low, high) in &spec.whiskers {
        xs.push(x);
        ys.push(low);
        ys.push(high);
    }
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let x_max = xs.iter().copied().fold(0.0, f64::max);
    let y_max = ys.iter().copied().fold(0.0, f64::max);
    let frame = Frame {
        x_min,
        x_max: if x_max > x_min { x_max } else { x_min + 1.0 },
        y_min: 0.0,
        y_max: if y_max > 0.0 { y_max * 1.05 } else { 1.0 },
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    );
    let _ = write!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    );
    let x0 = fmt(MARGIN_LEFT);
    let x1 = fmt(WIDTH - MARGIN_RIGHT);
    let y0 = fmt(HEIGHT - MARGIN_BOTTOM);
    let y1 = fmt(MARGIN_TOP);
    let _ = write!(
        svg,
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         \x20 <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    );

    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let xp = fmt(frame.x(xv));
        let yp = fmt(frame.y(yv));
        let _ = write!(
            svg,
            "  <line x1=\"{xp}\" y1=\"{y0}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt(HEIGHT - MARGIN_BOTTOM + 4.0)
        );
        let _ = write!(
            svg,
            "  <text x=\"{xp}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>\n",
            fmt(HEIGHT - MARGIN_BOTTOM + 18.0),
            tick_label(xv)
        );
        let _ = write!(
            svg,
            "  <line x1=\"{}\" y1=\"{yp}\" x2=\"{x0}\" y2=\"{yp}\" stroke=\"black\"/>\n",
            fmt(MARGIN_LEFT - 4.0)
        );
        let _ = write!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>\n",
            fmt(MARGIN_LEFT - 8.0),
            fmt(frame.y(yv) + 4.0),
            tick_label(yv)
        );
    }
    let _ = write!(
        svg,
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{}</text>\n",
        fmt((MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0),
        fmt(HEIGHT - 10.0),
        spec.x_label
    );
    let _ = write!(
        svg,
        "  <text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        fmt((MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0),
        fmt((MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0),
        spec.y_label
    );

    for &(x, low, high) in &spec.whiskers {
        let xp = fmt(frame.x(x));
        let _ = write!(
            svg,
            "  <line x1=\"{xp}\" y1=\"{}\" x2=\"{xp}\" y2=\"{}\" stroke=\"#555555\"/>\n",
            fmt(frame.y(low)),
            fmt(frame.y(high))
        );
    }
    for (i, series) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt(frame.x(x)), fmt(frame.y(y))))
            .collect();
        let _ = write!(
            svg,
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            coords.join(" ")
        );
        let legend_y = MARGIN_TOP + 16.0 * i as f64;
        let _ = write!(
            svg,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            fmt(WIDTH - MARGIN_RIGHT - 110.0),
            fmt(legend_y),
            fmt(WIDTH - MARGIN_RIGHT - 86.0),
            fmt(legend_y)
        );
        let _ = write!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            fmt(WIDTH - MARGIN_RIGHT - 80.0),
            fmt(legend_y + 4.0),
            series.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}
