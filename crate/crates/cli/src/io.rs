//! CSV and PGM reading and writing.
//!
//! Floats are written with 17 significant digits so every value re-reads
//! bit-identically. Files are written to a temporary sibling and renamed
//! into place, so a reader never sees a half-written output.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use sensorplace::{Matrix, Point};

use crate::error::{CliError, CliResult};

/// `17` significant digits, scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::cannot_open(path, e))
}

fn reader(path: &Path, header: bool) -> CliResult<csv::Reader<File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_reader(open(path)?))
}

fn parse_field(path: &Path, line: usize, field: &str) -> CliResult<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| CliError::usage(format!("{}:{line}: `{field}` is not a number", path.display())))?;
    if !v.is_finite() {
        return Err(CliError::usage(format!(
            "{}:{line}: `{field}` is not finite",
            path.display()
        )));
    }
    Ok(v)
}

/// A numeric matrix, one record per row.
pub fn read_matrix(path: &Path, header: bool) -> CliResult<Matrix> {
    let mut rdr = reader(path, header)?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(CliError::usage(format!(
                    "{}:{line}: expected {c} fields, found {}",
                    path.display(),
                    rec.len()
                )))
            }
            _ => {}
        }
        for field in rec.iter() {
            data.push(parse_field(path, line, field)?);
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(CliError::usage(format!("{}: no data", path.display())));
    }
    Matrix::from_row_major(rows, cols, data).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Per-location coordinates from named columns of a CSV with a header row.
pub fn read_coordinates(path: &Path, x: &str, y: &str, z: Option<&str>) -> CliResult<Vec<Point>> {
    let mut rdr = reader(path, true)?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::usage(format!("{}: no column named `{name}`", path.display())))
    };
    let (cx, cy) = (column(x)?, column(y)?);
    let cz = z.map(column).transpose()?;
    let mut points = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(k + 2, |p| p.line() as usize);
        let get = |c: usize| parse_field(path, line, rec.get(c).unwrap_or(""));
        points.push(match cz {
            Some(cz) => Point::xyz(get(cx)?, get(cy)?, get(cz)?),
            None => Point::xy(get(cx)?, get(cy)?),
        });
    }
    if points.is_empty() {
        return Err(CliError::usage(format!("{}: no coordinates", path.display())));
    }
    Ok(points)
}

/// A file to be written, fully rendered in memory.
pub struct Output {
    pub name: &'static str,
    pub bytes: Vec<u8>,
}

impl Output {
    pub fn csv(name: &'static str, header: Option<&[&str]>, rows: impl IntoIterator<Item = Vec<String>>) -> Self {
        let mut s = String::new();
        if let Some(h) = header {
            s.push_str(&h.join(","));
            s.push('\n');
        }
        for row in rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        Output {
            name,
            bytes: s.into_bytes(),
        }
    }

    pub fn text(name: &'static str, text: String) -> Self {
        Output {
            name,
            bytes: text.into_bytes(),
        }
    }
}

/// Matrix rows as CSV records.
pub fn matrix_rows(m: &Matrix) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..m.rows()).map(|i| m.row(i).iter().map(|&v| fmt_f64(v)).collect())
}

/// 16-bit binary PGM of a row-major `height x width` field, linearly mapped
/// so the minimum is 0 and the maximum 65535. A constant field maps to 0.
pub fn pgm(name: &'static str, values: &[f64], height: usize, width: usize) -> Output {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let mut bytes = format!(
        "P5\n# value = {} + pixel * {} / 65535\n{width} {height}\n65535\n",
        fmt_f64(lo),
        fmt_f64(range)
    )
    .into_bytes();
    for &v in values {
        let level = if range > 0.0 {
            ((v - lo) / range * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        bytes.extend_from_slice(&level.to_be_bytes());
    }
    Output { name, bytes }
}

/// Writes every output atomically into `dir`, creating it if needed.
pub fn write_all(dir: &Path, outputs: &[Output]) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::with_capacity(outputs.len());
    for out in outputs {
        let path = dir.join(out.name);
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(&path, e))?;
        tmp.write_all(&out.bytes).map_err(|e| CliError::io(&path, e))?;
        tmp.as_file().sync_all().map_err(|e| CliError::io(&path, e))?;
        tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
        written.push(path);
    }
    Ok(written)
}
