//! Buffered run outputs and the manifest written after them.

use std::fmt::Write as _;
use std::path::Path;

use rmt_lab::ModelParams;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// CSV cell with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn nums(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        self.row(&cells);
    }
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Option<ModelParams>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<OutputDigest>,
}

/// Files produced by a run, held in memory until the run has succeeded.
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    /// Document echoed to stdout.
    pub primary: Option<String>,
}

impl Outputs {
    pub fn new() -> Self {
        Self {
            files: Vec::new(),
            primary: None,
        }
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        if self.primary.is_none() {
            self.primary = Some(text.clone());
        }
        self.files.push((name.to_string(), text.into_bytes()));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, csv: Csv) {
        self.files.push((name.to_string(), csv.text.into_bytes()));
    }

    /// Writes every file, then `manifest.json` with their digests.
    pub fn commit(
        self,
        dir: &Path,
        command: &str,
        params: Option<ModelParams>,
        seed: Option<u64>,
    ) -> Result<Option<String>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut outputs = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            outputs.push(OutputDigest {
                file: name.clone(),
                sha256: hex(&Sha256::digest(bytes)),
            });
        }
        let manifest = RunManifest {
            command: command.to_string(),
            params,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        let path = dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(self.primary)
    }
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(2 * bytes.len());
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}
