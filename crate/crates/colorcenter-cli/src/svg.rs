//! Minimal self-contained SVG plots: axes, tick labels, polylines and
//! markers. No external renderer.

use crate::report::fmt_g;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw_step = (hi - lo) / target as f64;
    let magnitude = 10f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| (hi - lo) / s <= target as f64)
        .unwrap_or(magnitude * 10.0);
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = first;
    while t <= hi + step * 1e-9 {
        // avoid -0
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    ticks
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |r: (f64, f64)| {
            if r.1 > r.0 {
                let p = (r.1 - r.0) * 0.05;
                (r.0 - p, r.1 + p)
            } else {
                (r.0 - 1.0, r.1 + 1.0)
            }
        };
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_range: pad(x),
            y_range: pad(y),
            body: String::new(),
        }
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0)
            * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B
            - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0)
                * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        if points.is_empty() {
            return;
        }
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.sx(x), self.sy(y)))
            .collect();
        self.body.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            coords.join(" ")
        ));
    }

    /// Circle markers with per-point radius.
    pub fn circles(&mut self, points: &[(f64, f64, f64)], color: &str) {
        for &(x, y, r) in points {
            self.body.push_str(&format!(
                "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"{color}\" fill-opacity=\"0.75\"/>\n",
                self.sx(x),
                self.sy(y),
                r.max(0.4)
            ));
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        out.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        // frame
        out.push_str(&format!(
            "  <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        ));
        for t in nice_ticks(self.x_range.0, self.x_range.1, 8) {
            let x = self.sx(t);
            out.push_str(&format!(
                "  <line x1=\"{x:.2}\" y1=\"{:.1}\" x2=\"{x:.2}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
                HEIGHT - MARGIN_B,
                HEIGHT - MARGIN_B + 5.0
            ));
            out.push_str(&format!(
                "  <text x=\"{x:.2}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                HEIGHT - MARGIN_B + 18.0,
                fmt_g((t * 1e9).round() / 1e9)
            ));
        }
        for t in nice_ticks(self.y_range.0, self.y_range.1, 6) {
            let y = self.sy(t);
            out.push_str(&format!(
                "  <line x1=\"{:.1}\" y1=\"{y:.2}\" x2=\"{MARGIN_L}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
                MARGIN_L - 5.0
            ));
            out.push_str(&format!(
                "  <text x=\"{:.1}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                MARGIN_L - 8.0,
                y + 4.0,
                fmt_g((t * 1e9).round() / 1e9)
            ));
        }
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            HEIGHT - 12.0,
            self.x_label
        ));
        out.push_str(&format!(
            "  <text x=\"16\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            self.y_label
        ));
        out.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            self.title
        ));
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}
