//! CSV, JSON and SVG artifacts, written atomically after everything is
//! computed.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::Failure;

/// A finished output waiting to be written.
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(path: impl Into<PathBuf>, bytes: Vec<u8>) -> Self {
        Self {
            path: path.into(),
            bytes,
        }
    }

    pub fn json(path: impl Into<PathBuf>, value: &Value) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("json values serialize");
        bytes.push(b'\n');
        Self::new(path, bytes)
    }
}

/// Writes every artifact to a temporary file beside its target, then
/// renames them all. Nothing is renamed unless every write succeeded.
pub fn commit(artifacts: &[Artifact]) -> Result<(), Failure> {
    let mut staged = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let dir = match a.path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)
            .map_err(|e| Failure::input(format!("cannot write to {}: {e}", dir.display())))?;
        tmp.write_all(&a.bytes)
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| Failure::input(format!("writing {}: {e}", a.path.display())))?;
        staged.push((tmp, &a.path));
    }
    for (tmp, path) in staged {
        tmp.persist(path)
            .map_err(|e| Failure::input(format!("renaming onto {}: {}", path.display(), e.error)))?;
    }
    Ok(())
}

/// Column table rendered as CSV with full double precision.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row.iter().map(|v| format!("{v:.16e}")).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Log-log line plot. Non-positive points are dropped.
pub fn loglog_svg(series: &[(&str, Vec<(f64, f64)>)], xlabel: &str, ylabel: &str) -> Vec<u8> {
    let (w, h, m) = (720.0, 460.0, 70.0);
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, s)| {
            s.iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
                .map(|(x, y)| (x.log10(), y.log10()))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    for k in x0 as i32..=x1 as i32 {
        let x = sx(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/>"#,
            h - m,
            h - m + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">1e{k}</text>"#,
            h - m + 20.0
        );
    }
    for k in y0 as i32..=y1 as i32 {
        let y = sy(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.1}" x2="{m}" y2="{y:.1}" stroke="black"/>"#,
            m - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">1e{k}</text>"#,
            m - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
        w / 2.0,
        h - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{ylabel}</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, ((name, _), p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut line = String::new();
        for &(x, y) in p {
            let _ = write!(line, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            line.trim_end()
        );
        let ly = m + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{name}</text>"#,
            w - m - 120.0
        );
    }
    s.push_str("</svg>\n");
    s.into_bytes()
}
