//! Artifact files: CSV tables, SVG line charts and the checksum manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

/// Shortest decimal string that parses back to the same `f64`, in
/// scientific notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&a) || a.is_infinite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| io::Error::other(e.to_string()))
    }

    /// Aligned plain-text rendering for the terminal.
    pub fn to_text(&self) -> String {
        let mut width: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        for r in std::iter::once(&self.header).chain(&self.rows) {
            let line: Vec<String> = r.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub deterministic: bool,
    pub inputs: Vec<FileEntry>,
    pub parameters: BTreeMap<String, String>,
    pub outputs: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Output directory that records every file written into it.
pub struct Artifacts {
    dir: PathBuf,
    manifest: Manifest,
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str) -> Self {
        Artifacts {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command: command.into(),
                deterministic: true,
                inputs: Vec::new(),
                parameters: BTreeMap::new(),
                outputs: Vec::new(),
            },
        }
    }

    pub fn input(&mut self, path: &Path) -> io::Result<()> {
        let bytes = std::fs::read(path)?;
        self.manifest.inputs.push(FileEntry { file: path.display().to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.manifest.parameters.insert(key.into(), value.to_string());
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)?;
        self.manifest.outputs.push(FileEntry { file: name.into(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(path)
    }

    pub fn table(&mut self, name: &str, t: &Table) -> io::Result<PathBuf> {
        self.write(name, &t.to_csv()?)
    }

    pub fn finish(self) -> io::Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let text = serde_json::to_string_pretty(&self.manifest).map_err(io::Error::other)?;
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Static line chart; `log_y` plots `log10 y` and drops non-positive values.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let (w, h, m) = (640.0, 400.0, 60.0);
    let tf = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite() && (!log_y || p.1 > 0.0)).map(|&(x, y)| (x, tf(y))).collect())
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        b = h - m,
        r = w - m
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let ylab = if log_y { format!("1e{yv:.1}") } else { format!("{yv:.3e}") };
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{xv:.3}</text>"#, sx(xv), h - m + 16.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, m - 4.0, sy(yv) + 4.0, ylab);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 12.0, esc(x_label));
    let _ = writeln!(s, r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#, h / 2.0, h / 2.0, esc(y_label));
    for (i, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let c = COLORS[i % COLORS.len()];
        if !p.is_empty() {
            let d: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" stroke="{c}" fill="none" stroke-width="1.5"/>"#, d.join(" "));
        }
        let ly = m + 14.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{c}">{}</text>"#, w - m - 120.0, esc(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
