use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tolerance::Tolerances;
use crate::error::{QdError, Result};
use crate::fsio::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    Equal,
}

impl Comparison {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
            Comparison::Equal => value == threshold,
        }
    }
}

/// One measured quantity inside a check. Rows without a threshold are
/// informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub value: f64,
    pub threshold: Option<f64>,
    pub comparison: Option<Comparison>,
    pub lambda: Option<f64>,
}

impl Row {
    pub fn info(label: impl Into<String>, value: f64) -> Self {
        Row {
            label: label.into(),
            value,
            threshold: None,
            comparison: None,
            lambda: None,
        }
    }

    pub fn test(label: impl Into<String>, value: f64, cmp: Comparison, threshold: f64) -> Self {
        Row {
            label: label.into(),
            value,
            threshold: Some(threshold),
            comparison: Some(cmp),
            lambda: None,
        }
    }

    pub fn at_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn pass(&self) -> Option<bool> {
        match (self.comparison, self.threshold) {
            (Some(c), Some(t)) => Some(c.holds(self.value, t)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// headline value: the worst tested row
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
    pub seconds: f64,
    pub rows: Vec<Row>,
}

impl CheckRecord {
    /// Summarizes rows; the headline is the tested row closest to (or
    /// furthest past) its threshold, and the check passes iff every tested
    /// row passes.
    pub fn from_rows(name: &str, rows: Vec<Row>, seconds: f64) -> Self {
        let tested: Vec<&Row> = rows.iter().filter(|r| r.pass().is_some()).collect();
        let pass = tested.iter().all(|r| r.pass() == Some(true));
        let margin = |r: &Row| {
            let t = r.threshold.unwrap_or(0.0);
            match r.comparison {
                Some(Comparison::AtMost) => (t - r.value) / t.abs().max(f64::MIN_POSITIVE),
                Some(Comparison::AtLeast) => (r.value - t) / t.abs().max(f64::MIN_POSITIVE),
                _ => {
                    if r.value == t {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    }
                }
            }
        };
        let worst = tested
            .iter()
            .copied()
            .min_by(|a, b| margin(a).total_cmp(&margin(b)));
        let (value, threshold, comparison) = match worst {
            Some(r) => (r.value, r.threshold.unwrap_or(0.0), r.comparison.unwrap_or(Comparison::AtMost)),
            None => (0.0, 0.0, Comparison::AtMost),
        };
        CheckRecord {
            name: name.to_string(),
            value,
            threshold,
            comparison,
            pass,
            seconds,
            rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub os: String,
    pub arch: String,
    pub dim_cap: String,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Environment {
    pub fn current(seed: u64, tolerances: Tolerances) -> Self {
        Environment {
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            dim_cap: crate::linop::dim_cap().to_string(),
            seed,
            tolerances,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<CheckRecord>,
    pub environment: Environment,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }
}

/// 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header plus one row per check; checks with sweep rows get one extra line
/// per sweep point before their own line.
pub fn csv_string(report: &Report) -> String {
    let mut out = String::from("name,value,threshold,pass,seconds\n");
    for rec in &report.records {
        for row in rec.rows.iter().filter(|r| r.lambda.is_some()) {
            let _ = writeln!(
                out,
                "{},{},{},{},",
                csv_field(&format!("{}/{}", rec.name, row.label)),
                fmt_num(row.value),
                row.threshold.map(fmt_num).unwrap_or_default(),
                row.pass().map(|p| p.to_string()).unwrap_or_default(),
            );
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&rec.name),
            fmt_num(rec.value),
            fmt_num(rec.threshold),
            rec.pass,
            fmt_num(rec.seconds)
        );
    }
    out
}

pub fn emit_csv(report: &Report, path: &Path) -> Result<()> {
    write_atomic(path, csv_string(report).as_bytes())
}

/// Every lambda-indexed row of every check: `check,label,lambda,value`.
pub fn sweep_csv_string(report: &Report) -> String {
    let mut out = String::from("check,label,lambda,value\n");
    for rec in &report.records {
        for row in &rec.rows {
            if let Some(l) = row.lambda {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    csv_field(&rec.name),
                    csv_field(&row.label),
                    fmt_num(l),
                    fmt_num(row.value)
                );
            }
        }
    }
    out
}

pub fn emit_sweep_csv(report: &Report, path: &Path) -> Result<()> {
    write_atomic(path, sweep_csv_string(report).as_bytes())
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(|e| QdError::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| QdError::Parse(format!("report: {e}")))
}
