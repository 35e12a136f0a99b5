//! Files written next to every result: metadata records and CSV tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::commands::CliError;

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub config_path: String,
    pub overrides: &'a [String],
    pub seed: u64,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_seconds: f64,
    /// Fully resolved configuration, defaults included.
    pub config: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

/// CSV table with a header row. Rust float formatting is locale
/// independent and round-trips.
pub struct Csv {
    out: csv::Writer<fs::File>,
    path: PathBuf,
}

impl Csv {
    pub fn create(path: &Path, header: &[String]) -> Result<Self, CliError> {
        let out = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let mut table = Self { out, path: path.to_path_buf() };
        table.row(header)?;
        Ok(table)
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.out.write_record(fields).map_err(|e| csv_error(&self.path, e))
    }

    pub fn numbers(&mut self, values: &[f64]) -> Result<(), CliError> {
        let fields: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.row(&fields)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(|e| io_error(&self.path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

pub fn coordinate_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}
