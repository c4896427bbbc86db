//! Minimal SVG line charts with optional SPD(2) ellipse glyphs.
//!
//! Output is a pure function of the inputs: no timestamps, fixed number
//! formatting, stable element order.

use std::fmt::Write;

use nalgebra::{Matrix2, SymmetricEigen};

use crate::dmp::ManifoldTrajectory;
use crate::manifold::ManifoldDescriptor;

const WIDTH: f64 = 800.0;
const PLOT_HEIGHT: f64 = 360.0;
const GLYPH_HEIGHT: f64 = 120.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 40.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub times: Vec<f64>,
    pub series: Vec<Series>,
    /// `(t, row-major 2x2 SPD matrix)` drawn in a strip below the chart.
    pub ellipses: Vec<(f64, [f64; 4])>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

impl LineChart {
    pub fn new(title: impl Into<String>, times: Vec<f64>) -> Self {
        LineChart { title: title.into(), times, series: Vec::new(), ellipses: Vec::new() }
    }

    pub fn add_series(&mut self, name: impl Into<String>, values: Vec<f64>) -> &mut Self {
        self.series.push(Series { name: name.into(), values });
        self
    }

    pub fn add_ellipse(&mut self, t: f64, m: [f64; 4]) -> &mut Self {
        self.ellipses.push((t, m));
        self
    }

    pub fn to_svg(&self) -> String {
        let glyphs = !self.ellipses.is_empty();
        let height = MARGIN_T + PLOT_HEIGHT + MARGIN_B + if glyphs { GLYPH_HEIGHT } else { 0.0 };
        let (t0, t1) = range(self.times.iter().copied());
        let (y0, y1) = range(self.series.iter().flat_map(|s| s.values.iter().copied()));
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let sx = |t: f64| MARGIN_L + (t - t0) / (t1 - t0) * pw;
        let sy = |y: f64| MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * PLOT_HEIGHT;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (bx, by) = (MARGIN_L, MARGIN_T + PLOT_HEIGHT);
        let _ = writeln!(
            s,
            r#"<g stroke="black" stroke-width="1"><line x1="{bx}" y1="{by}" x2="{:.2}" y2="{by}"/><line x1="{bx}" y1="{MARGIN_T}" x2="{bx}" y2="{by}"/></g>"#,
            bx + pw
        );
        let _ = writeln!(s, r#"<g font-family="sans-serif" font-size="11">"#);
        for (v, y) in [(y0, by), (y1, MARGIN_T)] {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.4}</text>"#, bx - 6.0, y + 4.0);
        }
        for (v, x) in [(t0, bx), (t1, bx + pw)] {
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{v:.3}</text>"#, by + 16.0);
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t [s]</text>"#, bx + pw / 2.0, by + 32.0);
        let _ = writeln!(s, "</g>");

        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = self
                .times
                .iter()
                .zip(&series.values)
                .filter(|(_, v)| v.is_finite())
                .map(|(t, v)| format!("{:.2},{:.2}", sx(*t), sy(*v)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
            let ly = MARGIN_T + 14.0 * i as f64 + 6.0;
            let lx = WIDTH - MARGIN_R + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
                lx + 18.0,
                lx + 24.0,
                ly + 4.0,
                escape(&series.name)
            );
        }

        if glyphs {
            let cy = MARGIN_T + PLOT_HEIGHT + MARGIN_B + GLYPH_HEIGHT / 2.0;
            let cell = (pw / self.ellipses.len() as f64).min(GLYPH_HEIGHT) * 0.45;
            let shapes: Vec<(f64, f64, f64, f64)> = self.ellipses.iter().map(|(t, m)| {
                let eig = SymmetricEigen::new(Matrix2::new(m[0], m[1], m[2], m[3]));
                let (a, b) = if eig.eigenvalues[0] >= eig.eigenvalues[1] { (0, 1) } else { (1, 0) };
                let v = eig.eigenvectors.column(a);
                let angle = -v[1].atan2(v[0]).to_degrees();
                (*t, eig.eigenvalues[a].max(0.0).sqrt(), eig.eigenvalues[b].max(0.0).sqrt(), angle)
            }).collect();
            let biggest = shapes.iter().map(|e| e.1).fold(0.0, f64::max).max(1e-300);
            let _ = writeln!(s, r##"<g fill="#1f77b4" fill-opacity="0.25" stroke="#1f77b4">"##);
            for (t, ra, rb, angle) in shapes {
                let cx = sx(t);
                let _ = writeln!(
                    s,
                    r#"<ellipse cx="{cx:.2}" cy="{cy:.2}" rx="{:.2}" ry="{:.2}" transform="rotate({angle:.2} {cx:.2} {cy:.2})"/>"#,
                    ra / biggest * cell,
                    rb / biggest * cell
                );
            }
            let _ = writeln!(s, "</g>");
        }
        s.push_str("</svg>\n");
        s
    }
}

/// One line per ambient coordinate; SPD(2) trajectories, alone or as product
/// components, also get ellipse glyphs every tenth of the duration.
pub fn trajectory_chart(traj: &ManifoldTrajectory, title: &str) -> LineChart {
    let mut chart = LineChart::new(title, traj.times().to_vec());
    let d = traj.descriptor();
    for (c, name) in d.column_names().into_iter().enumerate() {
        chart.add_series(name, traj.points().iter().map(|p| p.data()[c]).collect());
    }
    let parts = d.components();
    let mut offset = 0;
    for part in &parts {
        if *part == ManifoldDescriptor::Spd(2) {
            let t0 = traj.times()[0];
            let span = traj.duration();
            let mut next = 0;
            for (t, p) in traj.times().iter().zip(traj.points()) {
                if next <= 10 && (*t - t0) >= span * next as f64 / 10.0 - 1e-12 {
                    let m = &p.data()[offset..offset + 4];
                    chart.add_ellipse(*t, [m[0], m[1], m[2], m[3]]);
                    next += 1;
                }
            }
            break;
        }
        offset += part.ambient_dim();
    }
    chart
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_and_is_deterministic() {
        let mut c = LineChart::new("a < b & c", vec![0.0, 1.0, 2.0]);
        c.add_series("x\"1", vec![0.0, 1.0, 0.5]);
        c.add_ellipse(1.0, [2.0, 0.0, 0.0, 1.0]);
        let svg = c.to_svg();
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(svg.contains("x&quot;1"));
        assert_eq!(svg, c.to_svg());
        assert_eq!(svg.matches("<ellipse").count(), 1);
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let mut c = LineChart::new("flat", vec![0.0, 1.0]);
        c.add_series("k", vec![3.0, 3.0]);
        assert!(!c.to_svg().contains("NaN"));
    }
}
