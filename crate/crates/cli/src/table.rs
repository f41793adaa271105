//! CSV tables with a comment header carrying the resolved config.

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Fixed-width scientific notation, so reruns are byte-identical.
pub fn num(v: f64) -> String {
    format!("{v:.9e}")
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn col(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric column; unparsable cells become NaN.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(c) = self.col(name) else { return Vec::new() };
        self.rows.iter().map(|r| r[c].parse().unwrap_or(f64::NAN)).collect()
    }

    pub fn text_column(&self, name: &str) -> Vec<&str> {
        let Some(c) = self.col(name) else { return Vec::new() };
        self.rows.iter().map(|r| r[c].as_str()).collect()
    }

    /// Writes `# ...` comment lines, then the CSV body.
    pub fn write(&self, path: &Path, comments: &[String]) -> Result<(), CliError> {
        let err = |e: &dyn std::fmt::Display| CliError::Output(format!("{}: {e}", path.display()));
        let mut buf = Vec::new();
        for c in comments {
            writeln!(buf, "# {c}").map_err(|e| err(&e))?;
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(&self.header).map_err(|e| err(&e))?;
            for r in &self.rows {
                w.write_record(r).map_err(|e| err(&e))?;
            }
            w.flush().map_err(|e| err(&e))?;
        }
        std::fs::write(path, buf).map_err(|e| err(&e))
    }

    /// Reads a table written by [`Table::write`], skipping comments.
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let err = |e: &dyn std::fmt::Display| CliError::Output(format!("{}: {e}", path.display()));
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| err(&e))?;
        let header = r.headers().map_err(|e| err(&e))?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|x| x.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(|e| err(&e))?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(Self { name, header, rows })
    }
}
