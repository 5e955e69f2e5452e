use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::{CliError, Format};

/// A property a run asserts; any failed check makes the run exit with status 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The claim this number instantiates.
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, claim: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            claim: claim.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    PropertyFailure,
}

/// Documentation of one CSV file written next to the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvDoc {
    pub file: String,
    pub description: String,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub doc: CsvDoc,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, description: &str, columns: &[&str]) -> Self {
        Self {
            doc: CsvDoc {
                file: file.to_string(),
                description: description.to_string(),
                columns: columns.iter().map(|c| c.to_string()).collect(),
            },
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.doc.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Io(e.to_string()))
    }
}

/// CSV produced by a core writer rather than row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCsv {
    pub doc: CsvDoc,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub claim: String,
    pub seed: u64,
    /// Resolved parameters of the run.
    pub config: Value,
    pub status: Status,
    pub checks: Vec<Check>,
    pub results: Value,
    pub csv: Vec<CsvDoc>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub raw_csv: Vec<RawCsv>,
}

impl Report {
    pub fn new(command: &str, claim: &str, seed: u64, config: Value) -> Self {
        Self {
            command: command.to_string(),
            claim: claim.to_string(),
            seed,
            config,
            status: Status::Ok,
            checks: Vec::new(),
            results: Value::Null,
            csv: Vec::new(),
            tables: Vec::new(),
            raw_csv: Vec::new(),
        }
    }

    pub fn check(&mut self, check: Check) {
        if !check.passed {
            self.status = Status::PropertyFailure;
        }
        self.checks.push(check);
    }

    pub fn table(&mut self, table: Table) {
        self.csv.push(table.doc.clone());
        self.tables.push(table);
    }

    pub fn raw(&mut self, doc: CsvDoc, bytes: Vec<u8>) {
        self.csv.push(doc.clone());
        self.raw_csv.push(RawCsv { doc, bytes });
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))
    }

    /// Human-readable summary: one line per check plus the overall status.
    pub fn summary(&self) -> String {
        let mut s = format!("{}: {}\n", self.command, self.claim);
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            s.push_str(&format!("  [{tag}] {}: {}\n", c.name, c.detail));
        }
        let status = match self.status {
            Status::Ok => "all checks passed",
            Status::PropertyFailure => "PROPERTY FAILURE",
        };
        s.push_str(&format!("  => {status}\n"));
        s
    }

    /// Writes `report.json`, `metadata.json` and the CSV files into `dir`.
    pub fn write_to(&self, dir: &Path, format: Format, metadata: &Value) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: &[u8]| -> Result<(), CliError> {
            let path = dir.join(name);
            fs::File::create(&path)?.write_all(bytes)?;
            written.push(path);
            Ok(())
        };
        if format.json() {
            put("report.json", self.to_json()?.as_bytes())?;
            let meta = serde_json::to_string_pretty(metadata).map_err(|e| CliError::Io(e.to_string()))?;
            put("metadata.json", meta.as_bytes())?;
        }
        if format.csv() {
            for t in &self.tables {
                put(&t.doc.file, &t.to_csv()?)?;
            }
            for r in &self.raw_csv {
                put(&r.doc.file, &r.bytes)?;
            }
        }
        Ok(written)
    }
}
