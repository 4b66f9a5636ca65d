//! Report assembly and rendering in text, CSV and JSON.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Csv,
    Json,
}

/// Echo of the parsed invocation. Numeric fields are strings.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub discriminant: String,
    pub sigma: Option<String>,
    pub n: Option<String>,
    pub digits: String,
    /// Digits actually used when they had to be raised.
    pub effective_digits: Option<String>,
    pub terms: String,
    pub prime_limit: String,
    pub function: Option<String>,
    pub output_format: OutputFormat,
    pub sign_fix: bool,
}

/// One output record: ordered `(column, value)` pairs.
pub type Row = Vec<(String, String)>;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity and the limit it was compared with.
    pub measured: String,
    pub limit: String,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub config: RunConfig,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    /// Extra lines shown only in text mode.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report {
            config,
            rows: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push_row<K: Into<String>, V: Into<String>>(&mut self, row: Vec<(K, V)>) {
        self.rows
            .push(row.into_iter().map(|(k, v)| (k.into(), v.into())).collect());
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write(&self, format: OutputFormat, out: &mut dyn Write) -> io::Result<()> {
        match format {
            OutputFormat::Text => self.write_text(out),
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }

    fn write_text(&self, out: &mut dyn Write) -> io::Result<()> {
        for note in &self.notes {
            writeln!(out, "{note}")?;
        }
        if !self.rows.is_empty() {
            let header: Vec<&str> = self.rows[0].iter().map(|(k, _)| k.as_str()).collect();
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for row in &self.rows {
                for (i, (_, v)) in row.iter().enumerate() {
                    if i < widths.len() {
                        widths[i] = widths[i].max(v.chars().count().min(40));
                    }
                }
            }
            let line = |cells: Vec<&str>| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            writeln!(out, "{}", line(header.clone()))?;
            for row in &self.rows {
                writeln!(
                    out,
                    "{}",
                    line(row.iter().map(|(_, v)| v.as_str()).collect())
                )?;
            }
        }
        for c in &self.checks {
            writeln!(
                out,
                "{} {}  measured={}  limit={}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.limit
            )?;
        }
        Ok(())
    }

    fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        if let Some(first) = self.rows.first() {
            let header: Vec<String> = first.iter().map(|(k, _)| csv_field(k)).collect();
            writeln!(out, "{}", header.join(","))?;
            for row in &self.rows {
                let cells: Vec<String> = row.iter().map(|(_, v)| csv_field(v)).collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        if !self.checks.is_empty() {
            if !self.rows.is_empty() {
                writeln!(out)?;
            }
            writeln!(out, "check,status,measured,limit")?;
            for c in &self.checks {
                writeln!(
                    out,
                    "{},{},{},{}",
                    csv_field(&c.name),
                    if c.passed { "pass" } else { "fail" },
                    csv_field(&c.measured),
                    csv_field(&c.limit)
                )?;
            }
        }
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (k, v) in row {
                    m.insert(k.clone(), Value::String(v.clone()));
                }
                Value::Object(m)
            })
            .collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "status": if c.passed { "pass" } else { "fail" },
                    "measured": c.measured,
                    "limit": c.limit,
                })
            })
            .collect();
        let doc = json!({
            "config": self.config,
            "rows": rows,
            "checks": checks,
        });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
