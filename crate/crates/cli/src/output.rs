use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use krein_dual::{DualError, Tolerances, VERSION};
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    /// The input has no stable dual; exit status 2.
    Unstable(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Unstable(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Unstable(msg) | CliError::Failed(msg) => f.write_str(msg),
        }
    }
}

impl From<DualError> for CliError {
    fn from(e: DualError) -> Self {
        if e.is_instability() {
            CliError::Unstable(format!("dynamically unstable: {e}"))
        } else {
            CliError::Failed(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("I/O error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(format!("CSV error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(format!("JSON error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    params: &'a serde_json::Value,
    tolerances: &'a Tolerances,
    version: &'a str,
    outputs: &'a [String],
}

/// Output directory plus the list of files written into it.
pub struct Run {
    dir: PathBuf,
    command: String,
    params: serde_json::Value,
    tolerances: Tolerances,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(dir: &Path, command: &str, params: serde_json::Value, tolerances: Tolerances) -> CliResult<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Failed(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), command: command.into(), params, tolerances, outputs: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.dir.join(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        let path = self.path(name);
        fs::write(path, text)?;
        Ok(())
    }

    /// Writes a CSV with the given header; every row must match its width.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        let outputs = std::mem::take(&mut self.outputs);
        let manifest = Manifest {
            command: &self.command,
            params: &self.params,
            tolerances: &self.tolerances,
            version: VERSION,
            outputs: &outputs,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(self.dir)
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
