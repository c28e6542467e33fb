//! Minimal deterministic SVG line plots of CSV columns.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A numeric CSV table with its leading `#` comment lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidArgument(format!("CSV has no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut table = CsvTable::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            table.comments.push(c.trim().to_string());
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if table.header.is_empty() {
            table.header = cells.iter().map(|s| s.to_string()).collect();
            continue;
        }
        if cells.len() != table.header.len() {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected {} fields, found {}", table.header.len(), cells.len()),
            });
        }
        let row = cells
            .iter()
            .map(|c| {
                c.parse::<f64>().map_err(|_| Error::Parse { line: lineno + 1, msg: format!("`{c}` is not a number") })
            })
            .collect::<Result<Vec<_>>>()?;
        table.rows.push(row);
    }
    Ok(table)
}

#[derive(Clone, Debug)]
pub struct PlotSpec {
    /// Abscissa column; defaults to the first column.
    pub x: Option<String>,
    /// Ordinate columns; defaults to all other columns.
    pub y: Vec<String>,
    pub title: Option<String>,
    pub log_x: bool,
    pub log_y: bool,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec { x: None, y: Vec::new(), title: None, log_x: true, log_y: true }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Option<Axis> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            let t = if log { v.log10() } else { v };
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() {
            return None;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Some(Axis { log, lo, hi })
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            (self.lo as i64..=self.hi as i64).map(|e| (10f64.powi(e as i32), format!("1e{e}"))).collect()
        } else {
            (0..=4)
                .map(|k| {
                    let v = self.lo + (self.hi - self.lo) * k as f64 / 4.0;
                    (v, format!("{v:.3}"))
                })
                .collect()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the plot. Points with nonpositive coordinates on a log axis are
/// dropped.
pub fn render_svg(table: &CsvTable, spec: &PlotSpec) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::InvalidArgument("CSV has no data rows".into()));
    }
    let xname = spec.x.clone().unwrap_or_else(|| table.header[0].clone());
    let ynames: Vec<String> = if spec.y.is_empty() {
        table.header.iter().filter(|h| **h != xname).cloned().collect()
    } else {
        spec.y.clone()
    };
    if ynames.is_empty() {
        return Err(Error::InvalidArgument("no ordinate columns to plot".into()));
    }
    let xs = table.column(&xname)?;
    let keep = |v: f64, log: bool| v.is_finite() && (!log || v > 0.0);
    let mut series = Vec::new();
    for name in &ynames {
        let ys = table.column(name)?;
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&ys)
            .filter(|(x, y)| keep(**x, spec.log_x) && keep(**y, spec.log_y))
            .map(|(x, y)| (*x, *y))
            .collect();
        series.push((name.clone(), pts));
    }
    let all = || series.iter().flat_map(|(_, p)| p.iter());
    let (Some(ax), Some(ay)) = (Axis::new(all().map(|p| p.0), spec.log_x), Axis::new(all().map(|p| p.1), spec.log_y))
    else {
        return Err(Error::InvalidArgument("no plottable points".into()));
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |v: f64| LEFT + pw * ax.frac(v);
    let py = |v: f64| TOP + ph * (1.0 - ay.frac(v));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    for c in &table.comments {
        let _ = writeln!(s, "<!-- {} -->", c.replace("--", "- -"));
    }
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    for (v, label) in ax.ticks() {
        let x = px(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            escape(&label)
        );
    }
    for (v, label) in ay.ticks() {
        let y = py(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            y + 4.0,
            escape(&label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&xname)
    );
    if let Some(t) = &spec.title {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(t)
        );
    }
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        for (x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(*x), py(*y));
        }
        if series.len() > 1 {
            let ly = TOP + 16.0 + 18.0 * k as f64;
            let lx = LEFT + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
                lx + 24.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
                lx + 30.0,
                ly + 4.0,
                escape(name)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Reads `csv`, renders it and writes `out`. Nothing is written on error.
pub fn emit_plot(csv: &Path, spec: &PlotSpec, out: &Path) -> Result<()> {
    let table = parse_csv(&std::fs::read_to_string(csv)?)?;
    let svg = render_svg(&table, spec)?;
    std::fs::write(out, svg)?;
    Ok(())
}
