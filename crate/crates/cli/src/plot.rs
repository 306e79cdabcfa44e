//! Minimal SVG line plots: one polyline, a frame, tick labels and titles.

use std::path::Path;

use svg::node::element::{Line, Polyline, Rectangle, Text};
use svg::Document;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
/// Polylines longer than this are thinned by striding.
const MAX_POINTS: usize = 4000;

pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn extent(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0) * 1e-3;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.3e}")
    } else {
        format!("{}", (v * 1e4).round() / 1e4)
    }
}

fn text(x: f64, y: f64, anchor: &str, content: impl Into<String>) -> Text {
    Text::new(content)
        .set("x", x)
        .set("y", y)
        .set("text-anchor", anchor)
        .set("font-family", "sans-serif")
        .set("font-size", 12)
}

impl LinePlot<'_> {
    pub fn render(&self) -> Document {
        let (x0, x1) = extent(self.x);
        let (y0, y1) = extent(self.y);
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let n = self.x.len().min(self.y.len());
        let stride = n.div_ceil(MAX_POINTS).max(1);
        let points: Vec<String> = (0..n)
            .step_by(stride)
            .map(|i| format!("{:.2},{:.2}", sx(self.x[i]), sy(self.y[i])))
            .collect();

        let mut doc = Document::new()
            .set("xmlns", "http://www.w3.org/2000/svg")
            .set("width", WIDTH)
            .set("height", HEIGHT)
            .set("viewBox", (0, 0, WIDTH, HEIGHT))
            .add(
                Rectangle::new()
                    .set("width", WIDTH)
                    .set("height", HEIGHT)
                    .set("fill", "white"),
            )
            .add(
                Rectangle::new()
                    .set("x", MARGIN_LEFT)
                    .set("y", MARGIN_TOP)
                    .set("width", pw)
                    .set("height", ph)
                    .set("fill", "none")
                    .set("stroke", "black"),
            )
            .add(
                Polyline::new()
                    .set("points", points.join(" "))
                    .set("fill", "none")
                    .set("stroke", "steelblue")
                    .set("stroke-width", 1.2),
            );

        for k in 0..=TICKS {
            let f = k as f64 / TICKS as f64;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            doc = doc
                .add(
                    Line::new()
                        .set("x1", px)
                        .set("x2", px)
                        .set("y1", MARGIN_TOP + ph)
                        .set("y2", MARGIN_TOP + ph + 5.0)
                        .set("stroke", "black"),
                )
                .add(text(px, MARGIN_TOP + ph + 18.0, "middle", tick_label(xv)))
                .add(
                    Line::new()
                        .set("x1", MARGIN_LEFT - 5.0)
                        .set("x2", MARGIN_LEFT)
                        .set("y1", py)
                        .set("y2", py)
                        .set("stroke", "black"),
                )
                .add(text(MARGIN_LEFT - 8.0, py + 4.0, "end", tick_label(yv)));
        }
        doc.add(text(WIDTH / 2.0, 24.0, "middle", self.title).set("font-size", 15))
            .add(text(
                MARGIN_LEFT + pw / 2.0,
                HEIGHT - 15.0,
                "middle",
                self.x_label,
            ))
            .add(
                text(18.0, MARGIN_TOP + ph / 2.0, "middle", self.y_label).set(
                    "transform",
                    format!("rotate(-90 18 {})", MARGIN_TOP + ph / 2.0),
                ),
            )
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        svg::save(path, &self.render())
    }
}
