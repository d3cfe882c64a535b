//! Minimal numeric CSV reading and writing.
//!
//! Every file this crate exchanges is a header line followed by rows of
//! plain decimal numbers, so a dedicated reader gives tighter error messages
//! (file line numbers) than a general-purpose CSV parser would.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A parsed numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[index])
    }
}

/// Parses CSV text. `source_name` is used in error messages only.
///
/// When `expected_header` is given the header must match it exactly.
/// Blank lines are skipped; row numbers in errors are 1-based file lines.
pub fn parse_table(text: &str, source_name: &str, expected_header: Option<&[&str]>) -> Result<Table> {
    let parse_err = |row: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        row,
        message,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let Some((header_row, header_line)) = lines.next() else {
        return Err(parse_err(1, "missing header".into()));
    };
    let header: Vec<String> = header_line.split(',').map(|h| h.trim().to_string()).collect();
    if let Some(expected) = expected_header {
        if header.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(parse_err(
                header_row,
                format!("expected header `{}`, found `{}`", expected.join(","), header_line),
            ));
        }
    }

    let mut rows = Vec::new();
    for (row, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(parse_err(
                row,
                format!("expected {} fields, found {}", header.len(), fields.len()),
            ));
        }
        let values = fields
            .iter()
            .zip(&header)
            .map(|(f, h)| {
                f.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(row, format!("invalid number `{}` in column `{h}`", f.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok(Table { header, rows })
}

pub fn read_table(path: &Path, expected_header: Option<&[&str]>) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, &path.display().to_string(), expected_header)
}

/// Formats a table. Values use the shortest decimal form that round-trips
/// to the same `f64`, so re-parsing reproduces the data exactly.
pub fn format_table<'a, I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            // -0 and 0 print differently; normalise so output is stable.
            let v = if *v == 0.0 { 0.0 } else { *v };
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
