use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::CliError;

/// One scored quantity. Rows without a tolerance are informational.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub case: String,
    pub expected: Option<f64>,
    pub measured: f64,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Row {
    /// `|measured − expected| ≤ tolerance`.
    pub fn within(case: impl Into<String>, expected: f64, measured: f64, tolerance: f64) -> Self {
        Self {
            case: case.into(),
            expected: Some(expected),
            measured,
            tolerance: Some(tolerance),
            pass: Some((measured - expected).abs() <= tolerance),
            note: None,
        }
    }

    /// `|measured − expected| ≤ rel · |expected|`; the stored tolerance is absolute.
    pub fn relative(case: impl Into<String>, expected: f64, measured: f64, rel: f64) -> Self {
        Self::within(case, expected, measured, rel * expected.abs())
    }

    /// `measured ≤ limit`.
    pub fn at_most(case: impl Into<String>, limit: f64, measured: f64) -> Self {
        Self {
            case: case.into(),
            expected: Some(limit),
            measured,
            tolerance: None,
            pass: Some(measured <= limit),
            note: Some("upper limit".into()),
        }
    }

    pub fn flag(case: impl Into<String>, ok: bool) -> Self {
        Self {
            case: case.into(),
            expected: Some(1.0),
            measured: if ok { 1.0 } else { 0.0 },
            tolerance: Some(0.0),
            pass: Some(ok),
            note: None,
        }
    }

    pub fn info(case: impl Into<String>, expected: Option<f64>, measured: f64) -> Self {
        Self {
            case: case.into(),
            expected,
            measured,
            tolerance: None,
            pass: None,
            note: None,
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub window: Option<u32>,
    pub trace_schema: Option<String>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: None,
            samples: None,
            window: None,
            trace_schema: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub metadata: Metadata,
    pub tables: Vec<Table>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl Report {
    pub fn new(metadata: Metadata) -> Self {
        Self {
            metadata,
            tables: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.tables.iter().flat_map(|t| &t.rows).all(|r| !r.failed())
    }

    /// `table/case` of every failing row.
    pub fn failures(&self) -> Vec<String> {
        self.tables
            .iter()
            .flat_map(|t| {
                t.rows
                    .iter()
                    .filter(|r| r.failed())
                    .map(move |r| format!("{}/{}", t.name, r.case))
            })
            .collect()
    }

    pub fn find(&self, table: &str, case: &str) -> Option<&Row> {
        self.tables
            .iter()
            .find(|t| t.name == table)
            .and_then(|t| t.rows.iter().find(|r| r.case == case))
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record([
                    "table",
                    "case",
                    "expected",
                    "measured",
                    "tolerance",
                    "pass",
                    "note",
                ])?;
                for t in &self.tables {
                    for r in &t.rows {
                        w.write_record([
                            t.name.clone(),
                            r.case.clone(),
                            opt(r.expected),
                            r.measured.to_string(),
                            opt(r.tolerance),
                            r.pass.map_or(String::new(), |p| p.to_string()),
                            r.note.clone().unwrap_or_default(),
                        ])?;
                    }
                }
                w.flush()?;
            }
        }
        Ok(())
    }

    /// Aligned plain-text rendering for terminals.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for t in &self.tables {
            let _ = writeln!(s, "== {} ==", t.name);
            for r in &t.rows {
                let verdict = match r.pass {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "info",
                };
                let _ = write!(s, "  {verdict:4}  {:<40} measured {:>12.6}", r.case, r.measured);
                if let Some(e) = r.expected {
                    let _ = write!(s, "  expected {e:>12.6}");
                }
                if let Some(tol) = r.tolerance {
                    let _ = write!(s, "  ±{tol:.2e}");
                }
                if let Some(n) = &r.note {
                    let _ = write!(s, "  ({n})");
                }
                s.push('\n');
            }
        }
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}
