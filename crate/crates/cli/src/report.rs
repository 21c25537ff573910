//! Machine-readable run reports and CSV tables.

use std::path::Path;

use ipl_core::conventions::convention_sheet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const REPORT_SCHEMA: &str = "ipl.report.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value ≤ tolerance`
    AtMost,
    /// `value ≥ tolerance`
    AtLeast,
    /// `|value − target| ≤ tolerance`
    Within,
    /// `value == target`
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn make(name: &str, value: f64, target: Option<f64>, tolerance: f64, comparison: Comparison) -> Self {
        let passed = match comparison {
            Comparison::AtMost => value <= tolerance,
            Comparison::AtLeast => value >= tolerance,
            Comparison::Within => (value - target.unwrap_or(0.0)).abs() <= tolerance,
            Comparison::Equal => value == target.unwrap_or(0.0),
        };
        Check { name: name.to_string(), value, target, tolerance, comparison, passed, detail: None }
    }

    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self::make(name, value, None, tolerance, Comparison::AtMost)
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self::make(name, value, None, bound, Comparison::AtLeast)
    }

    pub fn within(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self::make(name, value, Some(target), tolerance, Comparison::Within)
    }

    pub fn equal(name: &str, value: f64, target: f64) -> Self {
        Self::make(name, value, Some(target), 0.0, Comparison::Equal)
    }

    /// A check whose computation itself failed.
    pub fn errored(name: &str, err: impl std::fmt::Display) -> Self {
        Check {
            name: name.to_string(),
            value: f64::NAN,
            target: None,
            tolerance: 0.0,
            comparison: Comparison::Equal,
            passed: false,
            detail: Some(format!("error: {err}")),
        }
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

/// A CSV table; `file` is relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    pub file: String,
    pub columns: Vec<String>,
    pub rows: usize,
}

impl Table {
    pub fn new(file: &str, columns: &[&'static str]) -> Self {
        Table { file: file.to_string(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn header(&self) -> TableHeader {
        TableHeader { file: self.file.clone(), columns: self.columns.iter().map(|c| c.to_string()).collect(), rows: self.rows.len() }
    }

    pub fn write_csv(&self, path: &Path) -> csv::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip formatting, so tables are byte-stable.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub ipl_version: String,
    pub conventions_sha256: String,
    pub seed: Option<u64>,
}

pub fn conventions_sha256() -> String {
    let digest = Sha256::digest(convention_sheet().to_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl Provenance {
    pub fn current(seed: Option<u64>) -> Self {
        Provenance { ipl_version: env!("CARGO_PKG_VERSION").to_string(), conventions_sha256: conventions_sha256(), seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub subcommand: String,
    pub inputs: serde_json::Value,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub artifacts: Vec<TableHeader>,
    pub provenance: Provenance,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(
        subcommand: &str,
        inputs: serde_json::Value,
        checks: Vec<Check>,
        artifacts: Vec<TableHeader>,
        provenance: Provenance,
        wall_time_s: f64,
    ) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        Report { schema: REPORT_SCHEMA.into(), subcommand: subcommand.into(), inputs, passed, checks, artifacts, provenance, wall_time_s }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(Check::at_most("a", 1e-9, 1e-8).passed);
        assert!(!Check::at_most("a", f64::NAN, 1e-8).passed);
        assert!(Check::at_least("b", 0.0, 0.0).passed);
        assert!(Check::within("c", -1.97, -2.0, 0.05).passed);
        assert!(!Check::within("c", -1.9, -2.0, 0.05).passed);
        assert!(Check::equal("d", 4.0, 4.0).passed);
        assert!(!Check::errored("e", "boom").passed);
    }

    #[test]
    fn empty_report_fails() {
        let r = Report::new("x", serde_json::Value::Null, vec![], vec![], Provenance::current(None), 0.0);
        assert!(!r.passed);
    }

    #[test]
    fn hash_is_stable_hex() {
        let h = conventions_sha256();
        assert_eq!(h.len(), 64);
        assert_eq!(h, conventions_sha256());
    }
}
