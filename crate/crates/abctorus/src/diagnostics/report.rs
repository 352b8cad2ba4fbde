use std::fmt::{self, Write as _};

use crate::exact_torus::Rational;

/// `num/den`, the exact form written to CSV.
pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// A CSV table with a header row and `\n` line endings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

fn write_row(f: &mut fmt::Formatter<'_>, row: &[String]) -> fmt::Result {
    for (i, cell) in row.iter().enumerate() {
        if i > 0 {
            f.write_char(',')?;
        }
        if cell.contains([',', '"', '\n']) {
            write!(f, "\"{}\"", cell.replace('"', "\"\""))?;
        } else {
            f.write_str(cell)?;
        }
    }
    f.write_char('\n')
}

impl fmt::Display for CsvTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_row(f, &self.header)?;
        for row in &self.rows {
            write_row(f, row)?;
        }
        Ok(())
    }
}

/// One polyline of a line plot.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub color: String,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// A heatmap of `values` (row-major, `rows × cols`), darker for larger
/// values; row 0 is drawn at the bottom.
pub fn heatmap_svg(rows: usize, cols: usize, values: &[f64], title: &str) -> String {
    assert_eq!(values.len(), rows * cols, "heatmap size mismatch");
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let cw = (W - 2.0 * PAD) / cols.max(1) as f64;
    let ch = (H - 2.0 * PAD) / rows.max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    );
    for r in 0..rows {
        for c in 0..cols {
            let v = values[r * cols + c];
            let shade = if max > 0.0 {
                255.0 * (1.0 - v / max)
            } else {
                255.0
            };
            let g = shade.round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="rgb({g},{g},255)"/>"#,
                PAD + c as f64 * cw,
                H - PAD - (r + 1) as f64 * ch,
                cw,
                ch
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    s.push_str("</svg>\n");
    s
}

/// A line plot with one polyline per series and shaded vertical strips
/// `[x0, x1]` behind them.
pub fn line_plot_svg(series: &[Series], shaded: &[(f64, f64)], title: &str) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in series.iter().flat_map(|s| s.points.iter()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if !y0.is_finite() {
        (y0, y1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    );
    for &(a, b) in shaded {
        let (left, right) = (sx(a.min(b).max(x0)), sx(a.max(b).min(x1)));
        if right > left {
            let _ = writeln!(
                s,
                r#"<rect x="{left:.3}" y="{PAD}" width="{:.3}" height="{}" fill="rgb(220,220,220)"/>"#,
                right - left,
                H - 2.0 * PAD
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{}" font-family="sans-serif" font-size="11">{x0:e} .. {x1:e}</text>"#,
        H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="4" y="{}" font-family="sans-serif" font-size="11">{y1:e}</text>"#,
        PAD - 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="4" y="{}" font-family="sans-serif" font-size="11">{y0:e}</text>"#,
        H - PAD + 14.0
    );
    for (i, ser) in series.iter().enumerate() {
        let path: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" points="{}"/>"#,
            escape(&ser.color),
            path.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{}">{}</text>"#,
            W - PAD - 120.0,
            PAD + 14.0 * (i + 1) as f64,
            escape(&ser.color),
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}
