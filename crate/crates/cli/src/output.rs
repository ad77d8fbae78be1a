//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = concat!("qnrate ", env!("CARGO_PKG_VERSION"));

/// Shortest decimal that round-trips the value (at most 17 significant
/// digits), switching to exponent notation for very large or small
/// magnitudes. Independent of locale.
pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

/// A CSV table with optional trailing `#` comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new(), footer: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_error)?;
        }
        let mut bytes = w.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
        for line in &self.footer {
            bytes.extend_from_slice(b"# ");
            bytes.extend_from_slice(line.as_bytes());
            bytes.push(b'\n');
        }
        Ok(bytes)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| CliError::write(path, e))
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Usage(format!("cannot encode CSV: {e}"))
}

/// Record of one command run, written as `<out>.manifest` in `key=value`
/// lines: `command`, `tool_version`, every resolved parameter, any
/// diagnostics (prefixed `diagnostic.`) and one `artifact` line per output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Vec<(String, String)>,
    pub diagnostics: Vec<(String, String)>,
    pub artifact_paths: Vec<PathBuf>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: &[(String, String)]) -> Self {
        Self {
            command: command.to_string(),
            parameters: parameters.to_vec(),
            diagnostics: Vec::new(),
            artifact_paths: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn diagnostic(&mut self, key: &str, value: impl ToString) {
        self.diagnostics.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut s = format!("command={}\ntool_version={}\n", self.command, self.tool_version);
        for (k, v) in &self.parameters {
            s.push_str(&format!("{k}={v}\n"));
        }
        for (k, v) in &self.diagnostics {
            s.push_str(&format!("diagnostic.{k}={v}\n"));
        }
        for p in &self.artifact_paths {
            s.push_str(&format!("artifact={}\n", p.display()));
        }
        s
    }

    /// Writes the manifest next to `artifact`, which it lists as its output.
    pub fn write_for(mut self, artifact: &Path) -> Result<PathBuf> {
        self.artifact_paths = vec![artifact.to_path_buf()];
        let path = manifest_path(artifact);
        fs::write(&path, self.render()).map_err(|e| CliError::write(&path, e))?;
        Ok(path)
    }
}

/// `<out>.manifest`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".manifest");
    PathBuf::from(s)
}
