//! The JSON report written by every subcommand.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::emit::{emit_csv, emit_svg, Plot, Table};
use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub seed: Option<u64>,
    pub grid: Value,
    pub tolerances: Value,
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub inputs: Value,
    pub results: Value,
    pub pass: bool,
    pub artifacts: Vec<String>,
    pub provenance: Provenance,
}

/// What a subcommand hands back before provenance is attached.
pub struct Outcome {
    pub inputs: Value,
    pub results: Value,
    pub pass: bool,
    pub seed: Option<u64>,
    pub grid: Value,
    pub tolerances: Value,
    pub artifacts: Vec<String>,
}

impl Outcome {
    pub fn new(inputs: impl Serialize, results: impl Serialize, pass: bool) -> Self {
        Self {
            inputs: to_value(inputs),
            results: to_value(results),
            pass,
            seed: None,
            grid: Value::Null,
            tolerances: Value::Null,
            artifacts: Vec::new(),
        }
    }

    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn grid(mut self, grid: impl Serialize) -> Self {
        self.grid = to_value(grid);
        self
    }

    pub fn tolerances(mut self, tol: impl Serialize) -> Self {
        self.tolerances = to_value(tol);
        self
    }
}

pub fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Where artifacts go; files are only written when a directory is configured
/// or an artifact is explicitly requested.
#[derive(Clone, Debug)]
pub struct Sink {
    pub dir: Option<PathBuf>,
}

impl Sink {
    fn target(&self, name: &str) -> Result<PathBuf, CliError> {
        let dir = self.dir.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(dir.join(name))
    }

    /// Writes `stem.csv` and, when given, `stem.svg`; returns the paths written.
    pub fn table(&self, stem: &str, table: &Table, plot: Option<&Plot>) -> Result<Vec<String>, CliError> {
        let mut out = Vec::new();
        let csv = self.target(&format!("{stem}.csv"))?;
        emit_csv(&csv, table)?;
        out.push(display(&csv));
        if let Some(p) = plot {
            let svg = self.target(&format!("{stem}.svg"))?;
            emit_svg(&svg, p)?;
            out.push(display(&svg));
        }
        Ok(out)
    }

    /// Writes the report as `<command>.json` when a directory is configured.
    pub fn report(&self, report: &RunReport) -> Result<Option<PathBuf>, CliError> {
        let Some(dir) = &self.dir else { return Ok(None) };
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(format!("{}.json", report.command));
        std::fs::write(&path, render(report)).map_err(|e| CliError::io(&path, e))?;
        Ok(Some(path))
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn render(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
