//! Deterministic image output: grayscale rasters (binary PGM plus PNG) and
//! SVG line plots. Darkness 1 is black.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Row-major darkness values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub darkness: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, darkness: Vec<f64>) -> Result<Self> {
        if darkness.len() != width * height || width == 0 || height == 0 {
            return Err(Error::MissingData(format!(
                "{} values for a {width}×{height} image",
                darkness.len()
            )));
        }
        Ok(Self { width, height, darkness })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::MissingData("ragged image rows".into()));
        }
        Self::new(width, height, rows.concat())
    }

    /// 8-bit gray levels; NaN renders white.
    pub fn pixels(&self, scale: usize) -> Vec<u8> {
        let scale = scale.max(1);
        let mut out = Vec::with_capacity(self.width * self.height * scale * scale);
        for row in 0..self.height {
            let line: Vec<u8> = (0..self.width)
                .flat_map(|col| std::iter::repeat_n(gray(self.darkness[row * self.width + col]), scale))
                .collect();
            for _ in 0..scale {
                out.extend_from_slice(&line);
            }
        }
        out
    }

    pub fn pgm(&self, scale: usize) -> Vec<u8> {
        let scale = scale.max(1);
        let mut out = format!("P5\n{} {}\n255\n", self.width * scale, self.height * scale).into_bytes();
        out.extend(self.pixels(scale));
        out
    }

    pub fn png(&self, scale: usize) -> Result<Vec<u8>> {
        let scale = scale.max(1);
        let (w, h) = ((self.width * scale) as u32, (self.height * scale) as u32);
        let img = image::GrayImage::from_raw(w, h, self.pixels(scale))
            .ok_or_else(|| Error::Image("pixel buffer size mismatch".into()))?;
        let mut buf = std::io::Cursor::new(Vec::new());
        img.write_to(&mut buf, image::ImageFormat::Png).map_err(|e| Error::Image(e.to_string()))?;
        Ok(buf.into_inner())
    }

    /// Writes `<stem>.pgm` and `<stem>.png`.
    pub fn save(&self, dir: &Path, stem: &str, scale: usize) -> Result<()> {
        crate::backend::write_atomic(&dir.join(format!("{stem}.pgm")), &self.pgm(scale))?;
        crate::backend::write_atomic(&dir.join(format!("{stem}.png")), &self.png(scale)?)
    }
}

fn gray(darkness: f64) -> u8 {
    if darkness.is_nan() {
        return 255;
    }
    (255.0 * (1.0 - darkness.clamp(0.0, 1.0))).round() as u8
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
    pub stroke: &'static str,
    pub width: f64,
}

/// SVG of polylines over the square `[−extent, extent]²` (y up), with
/// optional dots.
pub fn svg(lines: &[Polyline], dots: &[([f64; 2], &'static str)], extent: f64, size: u32) -> String {
    let s = f64::from(size);
    let map = |p: [f64; 2]| ((p[0] + extent) / (2.0 * extent) * s, (extent - p[1]) / (2.0 * extent) * s);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(out, "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>");
    for l in lines {
        let pts: Vec<String> = l
            .points
            .iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let tag = if l.closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            out,
            "<{tag} points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
            pts.join(" "),
            l.stroke,
            l.width
        );
    }
    for &(p, fill) in dots {
        let (x, y) = map(p);
        let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2\" fill=\"{fill}\"/>");
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical bar chart with labels, values scaled to the tallest bar.
pub fn bar_chart(bars: &[(String, f64)], width: u32, height: u32) -> String {
    let max = bars.iter().map(|b| b.1).fold(0.0, f64::max).max(1e-300);
    let n = bars.len().max(1) as f64;
    let slot = f64::from(width) / n;
    let plot_h = f64::from(height) - 40.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(out, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    for (k, (label, v)) in bars.iter().enumerate() {
        let h = plot_h * v / max;
        let x = slot * k as f64 + 0.15 * slot;
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"black\"/>",
            plot_h - h + 10.0,
            0.7 * slot
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{label} {v:.3}</text>",
            slot * (k as f64 + 0.5),
            height - 12
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Scatter of `(x, y)` points with a fitted curve, both in data coordinates
/// mapped to the plot box.
pub fn xy_plot(points: &[[f64; 2]], curve: &[[f64; 2]], size: u32) -> String {
    let all: Vec<[f64; 2]> = points.iter().chain(curve).copied().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, 0.0f64, f64::MIN);
    for p in &all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if all.is_empty() || x1 <= x0 {
        x0 = 0.0;
        x1 = 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let s = f64::from(size);
    let m = 20.0;
    let map = |p: [f64; 2]| {
        let x = m + (p[0] - x0) / (x1 - x0) * (s - 2.0 * m);
        let y = s - m - (p[1] - y0) / (y1 - y0) * (s - 2.0 * m);
        [x, y]
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(out, "<rect width=\"{size}\" height=\"{size}\" fill=\"white\"/>");
    if !curve.is_empty() {
        let pts: Vec<String> = curve
            .iter()
            .map(|&p| {
                let q = map(p);
                format!("{:.3},{:.3}", q[0], q[1])
            })
            .collect();
        let _ = writeln!(out, "<polyline points=\"{}\" fill=\"none\" stroke=\"gray\"/>", pts.join(" "));
    }
    for &p in points {
        let q = map(p);
        let _ = writeln!(out, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"black\"/>", q[0], q[1]);
    }
    out.push_str("</svg>\n");
    out
}
