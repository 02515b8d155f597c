//! Minimal SVG heatmap writer with axes and a colour legend.

use std::fmt::Write as _;

use crate::table::{RowStatus, Table};

/// Regular grid of values; `values[ix * ys.len() + iy]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub value_label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

// viridis, sampled at 8 stops
const STOPS: [(u8, u8, u8); 8] = [
    (68, 1, 84),
    (70, 50, 126),
    (54, 92, 141),
    (39, 127, 142),
    (31, 161, 135),
    (74, 193, 109),
    (160, 218, 57),
    (253, 231, 37),
];

const MISSING: &str = "#bdbdbd";

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: u8, y: u8| (x as f64 + f * (y as f64 - x as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

impl Heatmap {
    /// Grid from two input columns and one value column of a sweep table.
    /// Infeasible rows become blank cells.
    pub fn from_table(table: &Table, x: &str, y: &str, z: &str, title: &str) -> Option<Self> {
        let (xi, yi, zi) = (table.column(x)?, table.column(y)?, table.column(z)?);
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for row in &table.rows {
            if !xs.contains(&row.values[xi]) {
                xs.push(row.values[xi]);
            }
            if !ys.contains(&row.values[yi]) {
                ys.push(row.values[yi]);
            }
        }
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let mut values = vec![f64::NAN; xs.len() * ys.len()];
        for row in &table.rows {
            let ix = xs.iter().position(|v| *v == row.values[xi])?;
            let iy = ys.iter().position(|v| *v == row.values[yi])?;
            if row.status == RowStatus::Ok {
                values[ix * ys.len() + iy] = row.values[zi];
            }
        }
        Some(Self {
            title: title.into(),
            x_label: x.into(),
            y_label: y.into(),
            value_label: z.into(),
            xs,
            ys,
            values,
        })
    }

    pub fn to_svg(&self) -> String {
        let (w, h) = (640.0, 480.0);
        let (left, top, plot_w, plot_h) = (80.0, 40.0, 440.0, 360.0);
        let (nx, ny) = (self.xs.len().max(1), self.ys.len().max(1));
        let (cw, ch) = (plot_w / nx as f64, plot_h / ny as f64);
        let finite = self.values.iter().copied().filter(|v| v.is_finite());
        let lo = finite.clone().fold(f64::INFINITY, f64::min);
        let hi = finite.fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
        let norm = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, left + plot_w / 2.0, esc(&self.title));

        for ix in 0..self.xs.len() {
            for iy in 0..self.ys.len() {
                let v = self.values[ix * self.ys.len() + iy];
                let fill = if v.is_finite() { color(norm(v)) } else { MISSING.into() };
                let x = left + ix as f64 * cw;
                let y = top + plot_h - (iy + 1) as f64 * ch;
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    cw + 0.05,
                    ch + 0.05
                );
            }
        }

        // axes
        let (x0, y0) = (left, top + plot_h);
        let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#);
        let ticks = |n: usize| -> Vec<usize> {
            if n <= 1 {
                return vec![0];
            }
            let k = 5.min(n - 1);
            (0..=k).map(|i| i * (n - 1) / k).collect()
        };
        for i in ticks(self.xs.len()) {
            let x = left + (i as f64 + 0.5) * cw;
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 5.0);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + 18.0, label(self.xs[i]));
        }
        for i in ticks(self.ys.len()) {
            let y = top + plot_h - (i as f64 + 0.5) * ch;
            let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, label(self.ys[i]));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + plot_w / 2.0, y0 + 38.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="24" y="{0}" text-anchor="middle" transform="rotate(-90 24 {0})">{1}</text>"#,
            top + plot_h / 2.0,
            esc(&self.y_label)
        );

        // legend
        let (lx, lw, steps) = (left + plot_w + 30.0, 18.0, 32);
        let sh = plot_h / steps as f64;
        for i in 0..steps {
            let t = (i as f64 + 0.5) / steps as f64;
            let y = top + plot_h - (i + 1) as f64 * sh;
            let _ = writeln!(s, r#"<rect x="{lx}" y="{y:.2}" width="{lw}" height="{:.2}" fill="{}"/>"#, sh + 0.05, color(t));
        }
        let _ = writeln!(s, r#"<rect x="{lx}" y="{top}" width="{lw}" height="{plot_h}" fill="none" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + lw + 4.0, top + plot_h, label(lo));
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + lw + 4.0, top + 10.0, label(hi));
        let _ = writeln!(s, r#"<text x="{lx}" y="{}">{}</text>"#, top - 8.0, esc(&self.value_label));
        s.push_str("</svg>\n");
        s
    }
}
