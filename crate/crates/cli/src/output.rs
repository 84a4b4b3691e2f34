//! Emitters: JSON lines (canonical), CSV projection, aligned tables.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::args::Format;

/// Flat projection of a result for CSV and pretty output.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: ToString>(headers: &[S]) -> Self {
        Table {
            headers: headers.iter().map(ToString::to_string).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: ToString>(&mut self, row: &[S]) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row.iter().map(ToString::to_string).collect());
    }

    fn csv(&self) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    fn pretty(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:>w$}"))
                .collect();
            padded.join("  ") + "\n"
        };
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        let mut out = line(&self.headers);
        out += &line(&rule);
        for row in &self.rows {
            out += &line(row);
        }
        out
    }
}

/// One result: JSON records plus their tabular projection.
#[derive(Debug, Clone, Default)]
pub struct Rendered {
    pub json: Vec<String>,
    pub table: Table,
}

impl Rendered {
    pub fn new(table: Table) -> Self {
        Rendered {
            json: Vec::new(),
            table,
        }
    }

    pub fn record<T: Serialize>(&mut self, value: &T) {
        self.json
            .push(serde_json::to_string(value).expect("result types serialize"));
    }

    pub fn render(&self, format: Format) -> io::Result<String> {
        match format {
            Format::Json => Ok(self.json.iter().map(|l| format!("{l}\n")).collect()),
            Format::Csv => self.table.csv(),
            Format::Pretty => Ok(self.table.pretty()),
        }
    }
}

/// Write-to-temporary then rename, so readers never see partial files.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn emit(text: &str, output: Option<&Path>) -> io::Result<()> {
    match output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            atomic_write(path, text.as_bytes())
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// Diagnostics go to standard error as one JSON object per line.
pub fn diagnostic(value: serde_json::Value) {
    eprintln!("{value}");
}

pub fn warn(message: &str) {
    diagnostic(json!({ "warning": message }));
}
