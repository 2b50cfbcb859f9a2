//! Matrix and label files.
//!
//! Dense CSV (no header, comma separated) and MatrixMarket (`coordinate` or
//! `array`, real or integer) are read into dense matrices. Numbers are written
//! in the shortest form that parses back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ccnmf_core::matrix::{DataSet, DenseMatrix};
use nalgebra::DMatrix;
use nalgebra_sparse::io::{load_coo_from_matrix_market_str, save_to_matrix_market_str};
use nalgebra_sparse::CooMatrix;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MatrixFormat {
    Csv,
    #[value(name = "mm")]
    MatrixMarket,
}

impl MatrixFormat {
    /// `.mtx` and `.mm` are MatrixMarket, anything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx" | "mm") => MatrixFormat::MatrixMarket,
            _ => MatrixFormat::Csv,
        }
    }
}

/// Whether samples are stored as the rows or the columns of a matrix file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Orientation {
    Rows,
    #[default]
    Cols,
}

/// Shortest round-trip text for `v`.
pub fn fmt_f64(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(t) => t.to_string(),
        None => s,
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_path_buf(), line, column, message: message.into() }
}

/// Parses a dense CSV matrix. Blank lines and lines starting with `#` are
/// skipped; every row must have the same number of fields.
pub fn parse_csv(text: &str, path: &Path) -> CliResult<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, 0, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.parse::<f64>().map_err(|_| parse_error(path, line, j + 1, format!("not a number: {field:?}")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(parse_error(
                    path,
                    line,
                    row.len().min(first.len()) + 1,
                    format!("expected {} fields, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(path, 1, 1, "no data rows"));
    }
    let (m, n) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

/// Parses a MatrixMarket file into a dense matrix; duplicate coordinate
/// entries are summed.
pub fn parse_matrix_market(text: &str, path: &Path) -> CliResult<DMatrix<f64>> {
    let coo: CooMatrix<f64> = load_coo_from_matrix_market_str(text).map_err(|e| {
        let (line, column) = locate(e.message());
        parse_error(path, line, column, e.message().to_string())
    })?;
    let mut out = DMatrix::zeros(coo.nrows(), coo.ncols());
    for (i, j, v) in coo.triplet_iter() {
        out[(i, j)] += *v;
    }
    Ok(out)
}

/// Pulls the ` --> line:column` marker out of a parser message.
fn locate(message: &str) -> (usize, usize) {
    let parse = || {
        let rest = &message[message.find("-->")? + 3..];
        let (line, tail) = rest.trim_start().split_once(':')?;
        let col: String = tail.chars().take_while(char::is_ascii_digit).collect();
        Some((line.parse().ok()?, col.parse().ok()?))
    };
    parse().unwrap_or((0, 0))
}

/// Reads a matrix file as stored, without orientation handling or checks.
pub fn read_matrix(path: &Path, format: Option<MatrixFormat>) -> CliResult<DMatrix<f64>> {
    let text = read_text(path)?;
    match format.unwrap_or_else(|| MatrixFormat::from_path(path)) {
        MatrixFormat::Csv => parse_csv(&text, path),
        MatrixFormat::MatrixMarket => parse_matrix_market(&text, path),
    }
}

/// Reads one integer label per line (blank lines and `#` comments skipped).
pub fn read_labels(path: &Path) -> CliResult<Vec<i64>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v = t.parse::<i64>().map_err(|_| parse_error(path, k + 1, 1, format!("not an integer label: {t:?}")))?;
        out.push(v);
    }
    Ok(out)
}

/// `data.csv` → `data.labels`.
pub fn sibling_labels_path(path: &Path) -> PathBuf {
    path.with_extension("labels")
}

/// Loads a features × samples data set.
///
/// With `Orientation::Rows` the file holds one sample per row and is
/// transposed on load. Labels come from `labels` if given, otherwise from
/// the sibling `.labels` file when one exists.
pub fn load_matrix(
    path: &Path,
    format: Option<MatrixFormat>,
    orientation: Orientation,
    labels: Option<&Path>,
) -> CliResult<DataSet> {
    let raw = read_matrix(path, format)?;
    let x = match orientation {
        Orientation::Cols => raw,
        Orientation::Rows => raw.transpose(),
    };
    let sibling = sibling_labels_path(path);
    let labels = match labels {
        Some(p) => Some(read_labels(p)?),
        None if sibling.is_file() && sibling != path => Some(read_labels(&sibling)?),
        None => None,
    };
    let matrix = DenseMatrix::new(x)?;
    Ok(DataSet::new(matrix, labels)?)
}

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Coordinate MatrixMarket text listing the nonzero entries.
pub fn matrix_to_matrix_market(m: &DMatrix<f64>) -> String {
    let coo = CooMatrix::from(m);
    save_to_matrix_market_str(&coo)
}

pub fn labels_to_text<T: std::fmt::Display>(labels: &[T]) -> String {
    let mut out = String::new();
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>, format: MatrixFormat) -> CliResult<()> {
    let text = match format {
        MatrixFormat::Csv => matrix_to_csv(m),
        MatrixFormat::MatrixMarket => matrix_to_matrix_market(m),
    };
    write_text(path, &text)
}
