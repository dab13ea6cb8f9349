//! Thin CSV helpers: strict header check, line-numbered field errors, and
//! a writer that formats floats with their shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: expected header `{expected}`, found `{found}`")]
    Schema {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}:{line}: field `{field}`: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        field: String,
        message: String,
    },
}

impl CsvError {
    pub fn line(&self) -> Option<u64> {
        match self {
            CsvError::Parse { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// One data row, with access by column name.
pub struct Row<'a> {
    path: &'a Path,
    header: &'a [&'a str],
    record: csv::StringRecord,
    line: u64,
}

impl Row<'_> {
    pub fn line(&self) -> u64 {
        self.line
    }

    pub fn raw(&self, field: &str) -> &str {
        let i = self
            .header
            .iter()
            .position(|h| *h == field)
            .expect("field is part of the checked header");
        self.record.get(i).unwrap_or("")
    }

    pub fn error(&self, field: &str, message: impl Into<String>) -> CsvError {
        CsvError::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn parse<T: FromStr>(&self, field: &str) -> Result<T, CsvError>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(field).trim();
        raw.parse::<T>().map_err(|e| self.error(field, format!("`{raw}`: {e}")))
    }

    /// Empty field maps to `None`.
    pub fn parse_opt<T: FromStr>(&self, field: &str) -> Result<Option<T>, CsvError>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(field).trim().is_empty() {
            Ok(None)
        } else {
            self.parse(field).map(Some)
        }
    }

    /// Finite float, optionally bounded to `[lo, hi]`.
    pub fn parse_f64(&self, field: &str, lo: f64, hi: f64) -> Result<f64, CsvError> {
        let v: f64 = self.parse(field)?;
        check_range(self, field, v, lo, hi)
    }

    pub fn parse_f64_opt(&self, field: &str, lo: f64, hi: f64) -> Result<Option<f64>, CsvError> {
        match self.parse_opt::<f64>(field)? {
            Some(v) => check_range(self, field, v, lo, hi).map(Some),
            None => Ok(None),
        }
    }
}

fn check_range(row: &Row<'_>, field: &str, v: f64, lo: f64, hi: f64) -> Result<f64, CsvError> {
    if !v.is_finite() || v < lo || v > hi {
        return Err(row.error(field, format!("{v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

/// Reads `path`, requiring exactly `header`, and feeds each row to `f`.
pub fn read_rows<T>(
    path: &Path,
    header: &[&str],
    mut f: impl FnMut(&Row<'_>) -> Result<T, CsvError>,
) -> Result<Vec<T>, CsvError> {
    let file = File::open(path).map_err(|source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);
    let found = reader
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    let expected = header.join(",");
    if found != expected {
        return Err(CsvError::Schema {
            path: path.to_path_buf(),
            expected,
            found,
        });
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let record = rec.map_err(|e| csv_err(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = Row {
            path,
            header,
            record,
            line,
        };
        out.push(f(&row)?);
    }
    Ok(out)
}

fn csv_err(path: &Path, e: csv::Error) -> CsvError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CsvError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CsvError::Parse {
            path: path.to_path_buf(),
            line,
            field: String::new(),
            message: format!("{other:?}"),
        },
    }
}

/// Writes a header and rows of pre-formatted fields.
pub fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), CsvError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let io_err = |source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err)?;
    }
    let file = File::create(path).map_err(io_err)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        let fields: Vec<String> = row.into_iter().collect();
        w.write_record(&fields).map_err(|e| csv_err(path, e))?;
    }
    let mut inner = w
        .into_inner()
        .map_err(|e| io_err(std::io::Error::other(e.to_string())))?;
    inner.flush().map_err(io_err)
}

/// Shortest string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}
