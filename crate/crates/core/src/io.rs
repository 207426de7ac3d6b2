//! Field files, CSV tables and run reports.
//!
//! Field binary layout, all little-endian:
//!
//! | offset | size | content                                    |
//! |--------|------|--------------------------------------------|
//! | 0      | 8    | magic `b"HYPWFLD\0"`                       |
//! | 8      | 4    | `u32` spatial dimension `d`                |
//! | 12     | 4    | `u32` components per node (equals `d`)     |
//! | 16     | 8    | `u64` interior nodes per axis `n`          |
//! | 24     | 8    | `u64` time steps `m`                       |
//! | 32     | 8    | `f64` horizon `T`                          |
//! | 40     | 8    | `u64` payload value count `(m+1) n^d d`    |
//! | 48     | 16   | reserved, zero                             |
//! | 64     | 8 * count | `f64` values, step-major, then node, then component |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridShape, SpaceTimeField};
use crate::inversion::IterateTrace;
use crate::verify::Table;

pub const FIELD_MAGIC: [u8; 8] = *b"HYPWFLD\0";
pub const HEADER_LEN: usize = 64;

/// Decoded header of a field file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldHeader {
    pub dim: u32,
    pub components: u32,
    pub n: u64,
    pub steps: u64,
    pub horizon: f64,
    pub count: u64,
}

impl FieldHeader {
    pub fn for_shape(shape: GridShape) -> Self {
        let d = shape.dim;
        FieldHeader {
            dim: d as u32,
            components: d as u32,
            n: shape.n as u64,
            steps: shape.steps as u64,
            horizon: shape.horizon,
            count: ((shape.steps + 1) * shape.n.pow(d as u32) * d) as u64,
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..8].copy_from_slice(&FIELD_MAGIC);
        b[8..12].copy_from_slice(&self.dim.to_le_bytes());
        b[12..16].copy_from_slice(&self.components.to_le_bytes());
        b[16..24].copy_from_slice(&self.n.to_le_bytes());
        b[24..32].copy_from_slice(&self.steps.to_le_bytes());
        b[32..40].copy_from_slice(&self.horizon.to_le_bytes());
        b[40..48].copy_from_slice(&self.count.to_le_bytes());
        b
    }

    pub fn parse(bytes: &[u8], path: &Path) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::format(path, format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len())));
        }
        if bytes[0..8] != FIELD_MAGIC {
            return Err(Error::format(path, "bad magic, not a field file"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let h = FieldHeader {
            dim: u32_at(8),
            components: u32_at(12),
            n: u64_at(16),
            steps: u64_at(24),
            horizon: f64::from_le_bytes(bytes[32..40].try_into().expect("8 bytes")),
            count: u64_at(40),
        };
        if h.components != h.dim {
            return Err(Error::format(path, format!("{} components for dimension {}", h.components, h.dim)));
        }
        let expect = (h.steps + 1)
            .checked_mul(h.n.checked_pow(h.dim).unwrap_or(u64::MAX))
            .and_then(|v| v.checked_mul(h.dim as u64));
        if expect != Some(h.count) {
            return Err(Error::format(path, "value count does not match the header shape"));
        }
        Ok(h)
    }

    /// Grid described by the header.
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim as usize, self.n as usize, self.horizon, self.steps as usize)
    }

    fn check_against(&self, grid: &Grid) -> Result<()> {
        let pairs = [
            ("field header dimension", grid.dim() as u64, self.dim as u64),
            ("field header n", grid.n() as u64, self.n),
            ("field header steps", grid.steps() as u64, self.steps),
        ];
        for (what, expected, actual) in pairs {
            if expected != actual {
                return Err(Error::mismatch(what, expected as usize, actual as usize));
            }
        }
        if self.horizon.to_bits() != grid.horizon().to_bits() {
            return Err(Error::invalid(format!(
                "field header horizon {} differs from grid horizon {}",
                self.horizon,
                grid.horizon()
            )));
        }
        Ok(())
    }
}

pub fn encode_field(field: &SpaceTimeField) -> Vec<u8> {
    let header = FieldHeader::for_shape(field.shape());
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * header.count as usize);
    out.extend_from_slice(&header.to_bytes());
    for v in field.values().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a whole file; `path` only labels errors.
pub fn decode_field(bytes: &[u8], path: &Path) -> Result<(Grid, SpaceTimeField)> {
    let header = FieldHeader::parse(bytes, path)?;
    let grid = header.grid()?;
    let payload = &bytes[HEADER_LEN..];
    let need = 8 * header.count as usize;
    if payload.len() < need {
        return Err(Error::format(
            path,
            format!("truncated payload: {} of {need} bytes", payload.len()),
        ));
    }
    if payload.len() > need {
        return Err(Error::format(path, format!("{} trailing bytes", payload.len() - need)));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let arr = ndarray::Array3::from_shape_vec((grid.steps() + 1, grid.nodes(), grid.dim()), values)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let field = SpaceTimeField::from_values(&grid, arr)?;
    Ok((grid, field))
}

pub fn save_field(path: impl AsRef<Path>, field: &SpaceTimeField) -> Result<()> {
    fs::write(path, encode_field(field))?;
    Ok(())
}

/// Loads a field and checks its header against `grid`.
pub fn load_field(path: impl AsRef<Path>, grid: &Grid) -> Result<SpaceTimeField> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let header = FieldHeader::parse(&bytes, path)?;
    header.check_against(grid)?;
    Ok(decode_field(&bytes, path)?.1)
}

/// Loads a field together with the grid its header describes.
pub fn load_field_any(path: impl AsRef<Path>) -> Result<(Grid, SpaceTimeField)> {
    let path = path.as_ref();
    decode_field(&fs::read(path)?, path)
}

/// Long-format CSV: `step,t,node,x0..,u0..`.
pub fn field_to_csv(grid: &Grid, field: &SpaceTimeField) -> Result<String> {
    field.check_grid(grid)?;
    let d = grid.dim();
    let mut s = String::from("step,t,node");
    (0..d).for_each(|a| write!(s, ",x{a}").expect("string write"));
    (0..d).for_each(|a| write!(s, ",u{a}").expect("string write"));
    s.push('\n');
    for k in 0..=grid.steps() {
        let slice = field.step(k);
        for node in 0..grid.nodes() {
            write!(s, "{k},{},{node}", grid.time(k)).expect("string write");
            for x in grid.node_position(node).iter().take(d) {
                write!(s, ",{x}").expect("string write");
            }
            for c in 0..d {
                write!(s, ",{}", slice[[node, c]]).expect("string write");
            }
            s.push('\n');
        }
    }
    Ok(s)
}

pub fn write_field_csv(path: impl AsRef<Path>, grid: &Grid, field: &SpaceTimeField) -> Result<()> {
    fs::write(path, field_to_csv(grid, field)?)?;
    Ok(())
}

/// Node values, one row per interior node and one column per component,
/// no header.
pub fn read_node_csv(path: impl AsRef<Path>, grid: &Grid) -> Result<Array2<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let d = grid.dim();
    let mut values = Vec::with_capacity(grid.nodes() * d);
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != d {
            return Err(Error::format(path, format!("line {}: expected {d} values, got {}", i + 1, parts.len())));
        }
        for p in parts {
            values.push(
                p.parse::<f64>()
                    .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?,
            );
        }
        rows += 1;
    }
    if rows != grid.nodes() {
        return Err(Error::mismatch("node rows", grid.nodes(), rows));
    }
    Array2::from_shape_vec((grid.nodes(), d), values).map_err(|e| Error::format(path, e.to_string()))
}

pub fn table_to_csv(table: &Table) -> String {
    let mut s = table.columns.join(",");
    s.push('\n');
    for row in &table.rows {
        let escaped: Vec<String> = row
            .iter()
            .map(|c| {
                if c.contains([',', '"', '\n']) {
                    format!("\"{}\"", c.replace('"', "\"\""))
                } else {
                    c.clone()
                }
            })
            .collect();
        s.push_str(&escaped.join(","));
        s.push('\n');
    }
    s
}

/// Writes `dir/<table.name>.csv` and returns its path.
pub fn write_table(dir: impl AsRef<Path>, table: &Table) -> Result<PathBuf> {
    let path = dir.as_ref().join(format!("{}.csv", table.name));
    fs::write(&path, table_to_csv(table))?;
    Ok(path)
}

/// One gated quantity: its measured value and pass flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub threshold: String,
}

/// Machine-readable summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
    #[serde(default)]
    pub gates: Vec<Gate>,
    #[serde(default)]
    pub tables: Vec<Table>,
    #[serde(default)]
    pub trace: Option<IterateTrace>,
    pub iterations: usize,
}

impl Report {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        Report {
            command: command.into(),
            seed,
            ..Report::default()
        }
    }

    pub fn with_trace(mut self, trace: IterateTrace) -> Self {
        self.iterations = trace.records.len();
        self.trace = Some(trace);
        self
    }

    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }
}

/// Writes `report.json`, one CSV per table and, with `plots`, SVG charts of
/// the misfit history and of the Taylor remainders. Returns written paths.
pub fn emit_report(dir: impl AsRef<Path>, report: &Report, plots: bool) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let json = dir.join("report.json");
    fs::write(&json, serde_json::to_string_pretty(report)?)?;
    written.push(json);
    for t in &report.tables {
        written.push(write_table(dir, t)?);
    }
    if let Some(trace) = &report.trace {
        let mut t = Table::new("trace", &["iteration", "misfit", "residual_norm", "gradient_norm", "admissible"]);
        for r in &trace.records {
            t.push(vec![
                r.iteration.to_string(),
                format!("{:e}", r.misfit),
                format!("{:e}", r.residual_norm),
                format!("{:e}", r.gradient_norm),
                r.admissible.to_string(),
            ]);
        }
        written.push(write_table(dir, &t)?);
        if plots && !trace.records.is_empty() {
            let pts: Vec<(f64, f64)> = trace.records.iter().map(|r| (r.iteration as f64, r.misfit)).collect();
            let path = dir.join("misfit.svg");
            fs::write(&path, svg_line_plot("misfit", "iteration", "misfit", &pts, false, true))?;
            written.push(path);
        }
    }
    if plots {
        if let Some(t) = report.tables.iter().find(|t| t.name == "taylor") {
            let pts: Vec<(f64, f64)> = t
                .rows
                .iter()
                .filter_map(|r| Some((r[0].parse().ok()?, r[1].parse().ok()?)))
                .collect();
            if !pts.is_empty() {
                let path = dir.join("taylor.svg");
                fs::write(&path, svg_line_plot("Taylor remainder", "s", "remainder", &pts, true, true))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Minimal SVG polyline chart; non-positive values are dropped on log axes.
pub fn svg_line_plot(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)], log_x: bool, log_y: bool) -> String {
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| (!log_x || *x > 0.0) && (!log_y || *y > 0.0))
        .map(|&(x, y)| (tx(x), ty(y)))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (w, h, pad) = (480.0, 320.0, 48.0);
    let span = |sel: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(sel).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = span(|p| p.0);
    let (y0, y1) = span(|p| p.1);
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let poly: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let axis = |log: bool, name: &str| if log { format!("log10 {name}") } else { name.to_string() };
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).expect("string write");
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).expect("string write");
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0).expect("string write");
    writeln!(
        s,
        r#"<path d="M{pad},{pad} V{} H{}" stroke="black" fill="none"/>"#,
        h - pad,
        w - pad
    )
    .expect("string write");
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, w / 2.0, h - 12.0, axis(log_x, xlabel)).expect("string write");
    writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        axis(log_y, ylabel)
    )
    .expect("string write");
    for (v, anchor, x, y) in [
        (x0, "start", pad, h - pad + 16.0),
        (x1, "end", w - pad, h - pad + 16.0),
    ] {
        writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="10">{v:.3}</text>"#).expect("string write");
    }
    for (v, y) in [(y0, h - pad), (y1, pad)] {
        writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" font-size="10">{v:.3}</text>"#, pad - 4.0).expect("string write");
    }
    if !poly.is_empty() {
        writeln!(s, r#"<polyline points="{}" stroke="steelblue" stroke-width="2" fill="none"/>"#, poly.join(" ")).expect("string write");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests;
