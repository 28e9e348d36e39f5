//! Artifact assembly: RFC-4180 CSV tables, polyline SVG plots, and atomic
//! writes with a manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::LabError;

/// Numbers in CSV cells use Rust's shortest round-trip scientific form.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot of several series on shared axes.
pub fn polyline_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Vec<u8> {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        (x0, x1) = (x0.min(0.0), x0.max(0.0) + 1.0);
    }
    if !(y1 > y0) {
        (y0, y1) = (y0.min(0.0), y0.max(0.0) + 1.0);
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut out = String::new();
    out += &format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    out += &format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n");
    out += &format!(
        "<path d=\"M{m} {m} V{b} H{r}\" fill=\"none\" stroke=\"black\"/>\n",
        b = h - m,
        r = w - m
    );
    out += &format!("<text x=\"{}\" y=\"25\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n", w / 2.0, escape(title));
    out += &format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n",
        w / 2.0,
        h - 12.0,
        escape(x_label)
    );
    out += &format!(
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        h / 2.0,
        h / 2.0,
        escape(y_label)
    );
    for (v, x, anchor) in [(x0, m, "start"), (x1, w - m, "end")] {
        out += &format!("<text x=\"{x}\" y=\"{}\" text-anchor=\"{anchor}\" font-size=\"10\">{}</text>\n", h - m + 14.0, tick(v));
    }
    for (v, y) in [(y0, h - m), (y1, m)] {
        out += &format!("<text x=\"{}\" y=\"{y}\" text-anchor=\"end\" font-size=\"10\">{}</text>\n", m - 4.0, tick(v));
    }
    for (k, s) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out += &format!("<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>\n", coords.join(" "));
        out += &format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{colour}\">{}</text>\n",
            w - m + 4.0 - 90.0,
            m + 14.0 * (k as f64 + 1.0),
            escape(&s.label)
        );
    }
    out += "</svg>\n";
    out.into_bytes()
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One file of a run's output.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
    /// Data rows (CSV only, header excluded).
    pub rows: Option<usize>,
}

impl Artifact {
    pub fn csv(name: &str, table: &Table) -> Self {
        Artifact { name: name.into(), bytes: table.to_csv(), rows: Some(table.rows.len()) }
    }

    pub fn json(name: &str, value: &serde_json::Value) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
        bytes.push(b'\n');
        Artifact { name: name.into(), bytes, rows: None }
    }

    pub fn svg(name: &str, bytes: Vec<u8>) -> Self {
        Artifact { name: name.into(), bytes, rows: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub rows: Option<usize>,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub kind: String,
    pub config_sha256: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub files: Vec<FileEntry>,
    pub duration_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory, then renames, so a
/// final path never holds a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, LabError> {
    let target = dir.join(name);
    let io = |e: std::io::Error| LabError::Runtime(format!("writing {}: {e}", target.display()));
    let mut tmp = tempfile::Builder::new().prefix(".partial-").tempfile_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<FileEntry>, LabError> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::Runtime(format!("creating {}: {e}", dir.display())))?;
    artifacts
        .iter()
        .map(|a| {
            if a.bytes.is_empty() {
                return Err(LabError::Runtime(format!("refusing to write empty output {}", a.name)));
            }
            write_atomic(dir, &a.name, &a.bytes)?;
            Ok(FileEntry { name: a.name.clone(), bytes: a.bytes.len(), rows: a.rows, sha256: sha256_hex(&a.bytes) })
        })
        .collect()
}
