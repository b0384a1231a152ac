//! Numeric table ingestion from CSV and NPY files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Npy,
}

impl TableFormat {
    /// `.npy` files are NPY, everything else is read as CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("npy") => TableFormat::Npy,
            _ => TableFormat::Csv,
        }
    }
}

/// A rectangular matrix read from disk, rows in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct TableFile {
    pub path: PathBuf,
    pub format: TableFormat,
    pub values: Array2<f64>,
    /// Column names from the CSV header row, if there was one.
    pub names: Option<Vec<String>>,
}

impl TableFile {
    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), message: message.into() }
}

pub fn load_table(path: impl AsRef<Path>, format: TableFormat) -> Result<TableFile> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let (values, names) = match format {
        TableFormat::Csv => parse_csv(&bytes, path)?,
        TableFormat::Npy => (parse_npy(&bytes, path)?, None),
    };
    Ok(TableFile { path: path.to_path_buf(), format, values, names })
}

/// Loads a table, picking the format from the file extension.
pub fn load_table_auto(path: impl AsRef<Path>) -> Result<TableFile> {
    let path = path.as_ref();
    load_table(path, TableFormat::from_path(path))
}

/// Parses comma-separated numbers with an optional header row.
///
/// The first row is a header when none of its cells is a number.
pub fn parse_csv(bytes: &[u8], path: &Path) -> Result<(Array2<f64>, Option<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut names = None;
    let mut data = Vec::new();
    let mut ncols = None;
    let mut nrows = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| format_err(path, e.to_string()))?;
        let line = idx + 1;
        if idx == 0 && record.iter().all(|c| c.parse::<f64>().is_err()) {
            names = Some(record.iter().map(str::to_owned).collect());
            ncols = Some(record.len());
            continue;
        }
        match ncols {
            None => ncols = Some(record.len()),
            Some(n) if n != record.len() => {
                return Err(format_err(path, format!("row {line} has {} columns, expected {n}", record.len())));
            }
            _ => {}
        }
        for (col, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| format_err(path, format!("row {line}, column {}: '{cell}' is not a number", col + 1)))?;
            if !v.is_finite() {
                return Err(format_err(path, format!("row {line}, column {}: non-finite value '{cell}'", col + 1)));
            }
            data.push(v);
        }
        nrows += 1;
    }
    let ncols = ncols.unwrap_or(0);
    if nrows == 0 || ncols == 0 {
        return Err(format_err(path, "no data rows"));
    }
    let values = Array2::from_shape_vec((nrows, ncols), data).map_err(|e| format_err(path, e.to_string()))?;
    Ok((values, names))
}

const NPY_MAGIC: &[u8] = b"\x93NUMPY";

/// Value of `'key': ...` in an NPY header dictionary, up to the next
/// top-level comma or closing brace.
fn header_field<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    let start = header.find(&format!("'{key}'"))? + key.len() + 2;
    let rest = header[start..].trim_start().strip_prefix(':')?.trim_start();
    let mut depth = 0;
    for (i, ch) in rest.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' | '}' if depth == 0 => return Some(rest[..i].trim()),
            _ => {}
        }
    }
    None
}

/// Parses a version 1.0, C-order, 2-D `<f8` or `<i8` NPY buffer.
pub fn parse_npy(bytes: &[u8], path: &Path) -> Result<Array2<f64>> {
    if bytes.len() < 10 || &bytes[..6] != NPY_MAGIC {
        return Err(format_err(path, "not an npy file (bad magic)"));
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(format_err(path, format!("unsupported npy format version {major}.{minor}; only 1.0 is accepted")));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = 10 + header_len;
    if bytes.len() < data_start {
        return Err(format_err(path, "truncated npy header"));
    }
    let header = std::str::from_utf8(&bytes[10..data_start]).map_err(|_| format_err(path, "npy header is not ASCII"))?;

    let descr = header_field(header, "descr").ok_or_else(|| format_err(path, "npy header lacks 'descr'"))?;
    let is_int = match descr.trim_matches(|c| c == '\'' || c == '"') {
        "<f8" => false,
        "<i8" => true,
        other => {
            return Err(format_err(path, format!("unsupported npy dtype {other}; expected little-endian f8 or i8")));
        }
    };
    match header_field(header, "fortran_order") {
        Some("False") => {}
        Some(_) => return Err(format_err(path, "Fortran-ordered npy arrays are not supported")),
        None => return Err(format_err(path, "npy header lacks 'fortran_order'")),
    }
    let shape = header_field(header, "shape").ok_or_else(|| format_err(path, "npy header lacks 'shape'"))?;
    let dims: Vec<usize> = shape
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format_err(path, format!("bad npy shape {shape}"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(format_err(path, format!("npy array must be 2-D, got shape {shape}")));
    };

    let payload = &bytes[data_start..];
    if payload.len() != rows * cols * 8 {
        return Err(format_err(path, format!("npy payload has {} bytes, expected {}", payload.len(), rows * cols * 8)));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let raw: [u8; 8] = chunk.try_into().unwrap();
        let v = if is_int { i64::from_le_bytes(raw) as f64 } else { f64::from_le_bytes(raw) };
        if !v.is_finite() {
            return Err(format_err(path, format!("row {}, column {}: non-finite value", i / cols + 1, i % cols + 1)));
        }
        data.push(v);
    }
    Array2::from_shape_vec((rows, cols), data).map_err(|e| format_err(path, e.to_string()))
}

/// Encodes a matrix as a version 1.0 `<f8` NPY buffer.
pub fn encode_npy(values: &Array2<f64>) -> Vec<u8> {
    let (rows, cols) = values.dim();
    let mut header = format!("{{'descr': '<f8', 'fortran_order': False, 'shape': ({rows}, {cols}), }}");
    // Pad so the payload starts on a 64-byte boundary; the header ends in '\n'.
    let unpadded = 10 + header.len() + 1;
    header.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    header.push('\n');
    let mut out = Vec::with_capacity(10 + header.len() + rows * cols * 8);
    out.extend_from_slice(NPY_MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in values.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_npy(path: impl AsRef<Path>, values: &Array2<f64>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_npy(values)).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes a CSV table with an optional header row.
pub fn write_csv(path: impl AsRef<Path>, values: &Array2<f64>, names: Option<&[String]>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    if let Some(names) = names {
        out.push_str(&names.join(","));
        out.push('\n');
    }
    for row in values.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    f.write_all(out.as_bytes()).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
