//! Minimal static SVG rendering for report figures.
//!
//! Deliberately dependency-free line/scatter/stem drawing the CSV outputs can
//! always reproduce in richer tooling; these figures exist so a report
//! directory is inspectable on its own.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 58.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 44.0;

/// A data-space to pixel-space mapping with the plot frame.
pub struct Plot {
    svg: String,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1000.0 || a < 0.01 {
        format!("{v:.1e}")
    } else if a < 1.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

impl Plot {
    pub fn new(title: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Plot {
        let (mut x_min, mut x_max) = x_range;
        let (mut y_min, mut y_max) = y_range;
        if !(x_max > x_min) {
            x_max = x_min + 1.0;
        }
        if !(y_max > y_min) {
            y_max = y_min + 1.0;
        }
        // Breathing room above and below the data.
        let pad = 0.04 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;

        let mut svg = String::new();
        let _ = writeln!(svg, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
        let _ = writeln!(
            svg,
            r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
        );
        let _ = writeln!(svg, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##);
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="20" font-family="sans-serif" font-size="14" fill="#222">{}</text>"##,
            MARGIN_L,
            xml_escape(title)
        );
        let mut plot = Plot { svg, x_min, x_max, y_min, y_max };
        plot.frame_and_ticks();
        plot
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }

    fn frame_and_ticks(&mut self) {
        let x0 = MARGIN_L;
        let x1 = WIDTH - MARGIN_R;
        let y0 = MARGIN_T;
        let y1 = HEIGHT - MARGIN_B;
        let _ = writeln!(
            self.svg,
            r##"<rect x="{x0}" y="{y0}" width="{:.1}" height="{:.1}" fill="none" stroke="#444" stroke-width="1"/>"##,
            x1 - x0,
            y1 - y0
        );
        for i in 0..=4 {
            let fx = self.x_min + (self.x_max - self.x_min) * i as f64 / 4.0;
            let px = self.px(fx);
            let _ = writeln!(
                self.svg,
                r##"<line x1="{px:.1}" y1="{y1}" x2="{px:.1}" y2="{:.1}" stroke="#444" stroke-width="1"/>"##,
                y1 + 4.0
            );
            let _ = writeln!(
                self.svg,
                r##"<text x="{px:.1}" y="{:.1}" font-family="sans-serif" font-size="10" fill="#222" text-anchor="middle">{}</text>"##,
                y1 + 16.0,
                fmt_tick(fx)
            );
            let fy = self.y_min + (self.y_max - self.y_min) * i as f64 / 4.0;
            let py = self.py(fy);
            let _ = writeln!(
                self.svg,
                r##"<line x1="{:.1}" y1="{py:.1}" x2="{x0}" y2="{py:.1}" stroke="#444" stroke-width="1"/>"##,
                x0 - 4.0
            );
            let _ = writeln!(
                self.svg,
                r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" fill="#222" text-anchor="end">{}</text>"##,
                x0 - 6.0,
                py + 3.0,
                fmt_tick(fy)
            );
        }
    }

    pub fn polyline(&mut self, xs: &[f64], ys: &[f64], color: &str, width: f64) {
        if xs.is_empty() {
            return;
        }
        let mut points = String::new();
        for (x, y) in xs.iter().zip(ys) {
            let _ = write!(points, "{:.2},{:.2} ", self.px(*x), self.py(*y));
        }
        let _ = writeln!(
            self.svg,
            r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"##,
            points.trim_end()
        );
    }

    pub fn scatter(&mut self, xs: &[f64], ys: &[f64], color: &str, radius: f64) {
        for (x, y) in xs.iter().zip(ys) {
            let _ = writeln!(
                self.svg,
                r##"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{color}" fill-opacity="0.6"/>"##,
                self.px(*x),
                self.py(*y)
            );
        }
    }

    /// Vertical stems from y = 0, for ACF plots.
    pub fn stems(&mut self, xs: &[f64], ys: &[f64], color: &str) {
        let base = self.py(0.0);
        for (x, y) in xs.iter().zip(ys) {
            let px = self.px(*x);
            let _ = writeln!(
                self.svg,
                r##"<line x1="{px:.2}" y1="{base:.2}" x2="{px:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/>"##,
                self.py(*y)
            );
        }
    }

    /// Density bars centered on the grid points.
    pub fn bars(&mut self, centers: &[f64], heights: &[f64], width: f64, color: &str) {
        let base = self.py(0.0);
        for (c, h) in centers.iter().zip(heights) {
            let x = self.px(c - width / 2.0);
            let w = self.px(c + width / 2.0) - x;
            let y = self.py(*h);
            let _ = writeln!(
                self.svg,
                r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{:.2}" fill="{color}" fill-opacity="0.55" stroke="#36618e" stroke-width="0.5"/>"##,
                (base - y).max(0.0)
            );
        }
    }

    pub fn hline(&mut self, y: f64, color: &str, dashed: bool) {
        let py = self.py(y);
        let dash = if dashed { r##" stroke-dasharray="6,4""## } else { "" };
        let _ = writeln!(
            self.svg,
            r##"<line x1="{MARGIN_L}" y1="{py:.2}" x2="{:.1}" y2="{py:.2}" stroke="{color}" stroke-width="1"{dash}/>"##,
            WIDTH - MARGIN_R
        );
    }

    pub fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

/// Minimal well-formedness check used by tests: one root element, balanced
/// tags, escaped text.
pub fn looks_like_valid_svg(s: &str) -> bool {
    let trimmed = s.trim_start();
    if !trimmed.starts_with("<?xml") && !trimmed.starts_with("<svg") {
        return false;
    }
    if !s.trim_end().ends_with("</svg>") {
        return false;
    }
    // Every '<' must open a tag that closes, and no stray '&'.
    let opens = s.matches("<svg").count();
    let closes = s.matches("</svg>").count();
    opens == 1 && closes == 1
}

pub fn range_of(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_produces_wellformed_svg() {
        let mut p = Plot::new("demo <&>", (0.0, 10.0), (-1.0, 1.0));
        p.polyline(&[0.0, 5.0, 10.0], &[-1.0, 0.5, 1.0], "#2266aa", 1.5);
        p.scatter(&[1.0, 2.0], &[0.1, -0.2], "#aa2222", 2.0);
        p.stems(&[3.0, 4.0], &[0.4, -0.4], "#222222");
        p.bars(&[6.0, 7.0], &[0.5, 0.8], 0.9, "#88aacc");
        p.hline(0.0, "#888888", true);
        let svg = p.finish();
        assert!(looks_like_valid_svg(&svg));
        assert!(svg.contains("&lt;&amp;&gt;"));
    }

    #[test]
    fn degenerate_ranges_do_not_divide_by_zero() {
        let p = Plot::new("flat", (2.0, 2.0), (5.0, 5.0));
        let svg = p.finish();
        assert!(looks_like_valid_svg(&svg));
        assert!(!svg.contains("NaN"));
    }
}
