//! Compares run outputs with recorded goldens.
//!
//! Every `*.csv` in the golden directory must exist in the output
//! directory with the same header and row count. Text cells match
//! exactly; numeric cells match within `abs + rel·|expected|`, with
//! per-column values from an optional `tolerances.toml`:
//!
//! ```toml
//! default = { rel = 1e-9, abs = 0.0 }
//!
//! [columns]
//! "velocity.v_sim" = { rel = 1e-6 }   # one file
//! displacement_nm = { abs = 0.5 }     # any file
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 0.0 }
    }
}

impl Tolerance {
    pub fn accepts(&self, expected: f64, actual: f64) -> bool {
        if expected.is_nan() || actual.is_nan() {
            return expected.is_nan() && actual.is_nan();
        }
        if expected == actual {
            return true;
        }
        (actual - expected).abs() <= self.abs + self.rel * expected.abs()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub default: Tolerance,
    pub columns: BTreeMap<String, Tolerance>,
}

impl Tolerances {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join("tolerances.toml");
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::ConfigInvalid(vec![format!("{}: {e}", path.display())]))
    }

    pub fn for_column(&self, file: &str, column: &str) -> Tolerance {
        self.columns
            .get(&format!("{file}.{column}"))
            .or_else(|| self.columns.get(column))
            .copied()
            .unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldenReport {
    pub files: usize,
    pub cells: usize,
    pub mismatches: Vec<String>,
}

/// Cell-by-cell comparison of two tables named `file`.
pub fn compare_tables(file: &str, expected: &Table, actual: &Table, tol: &Tolerances, report: &mut GoldenReport) {
    if expected.header != actual.header {
        report
            .mismatches
            .push(format!("{file}: header {:?}, golden {:?}", actual.header, expected.header));
        return;
    }
    if expected.rows.len() != actual.rows.len() {
        report
            .mismatches
            .push(format!("{file}: {} rows, golden has {}", actual.rows.len(), expected.rows.len()));
    }
    for (i, (e_row, a_row)) in expected.rows.iter().zip(&actual.rows).enumerate() {
        for ((col, e), a) in expected.header.iter().zip(e_row).zip(a_row) {
            report.cells += 1;
            let ok = match (e.parse::<f64>(), a.parse::<f64>()) {
                (Ok(x), Ok(y)) => tol.for_column(file, col).accepts(x, y),
                _ => e == a,
            };
            if !ok {
                report.mismatches.push(format!("{file} row {} column {col}: got {a}, golden {e}", i + 1));
            }
        }
    }
}

/// Compares every golden CSV with its counterpart in `out`.
pub fn compare_golden(out: &Path, golden: &Path) -> Result<GoldenReport, CliError> {
    let tol = Tolerances::load(golden)?;
    let mut names: Vec<String> = std::fs::read_dir(golden)
        .map_err(|e| CliError::Output(format!("{}: {e}", golden.display())))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(CliError::GoldenMismatch(vec![format!("{}: no golden CSV files", golden.display())]));
    }
    let mut report = GoldenReport::default();
    for name in names {
        let stem = name.trim_end_matches(".csv");
        let expected = Table::read(&golden.join(&name))?;
        let path = out.join(&name);
        if !path.exists() {
            report.mismatches.push(format!("{name}: missing from the run output"));
            continue;
        }
        let actual = Table::read(&path)?;
        compare_tables(stem, &expected, &actual, &tol, &mut report);
        report.files += 1;
    }
    Ok(report)
}
