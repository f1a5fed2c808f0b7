//! Result files, checksums and the run manifest.

use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{Config, Scenario};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl OutputFile {
    pub fn new(name: &str, bytes: Vec<u8>) -> Self {
        Self {
            name: name.to_string(),
            bytes,
        }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

pub fn csv_bytes<I>(header: &[&str], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

pub fn manifest(cfg: &Config, scenario: &str, files: &[OutputFile], elapsed: Duration) -> Result<Vec<u8>, CliError> {
    let entries: Vec<FileEntry> = files
        .iter()
        .map(|f| FileEntry {
            name: f.name.clone(),
            sha256: f.sha256(),
            bytes: f.bytes.len(),
        })
        .collect();
    json_bytes(&json!({
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": scenario,
        "seed": cfg.seed,
        "config": cfg,
        "files": entries,
        "wall_clock_seconds": elapsed.as_secs_f64(),
    }))
}

/// Writes every file and then `manifest.json` into `dir`.
pub fn write_all(dir: &Path, cfg: &Config, scenario: &str, files: &[OutputFile], elapsed: Duration) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for f in files {
        let p = dir.join(&f.name);
        std::fs::write(&p, &f.bytes).map_err(|e| CliError::io(&p, e))?;
    }
    let p = dir.join("manifest.json");
    std::fs::write(&p, manifest(cfg, scenario, files, elapsed)?).map_err(|e| CliError::io(&p, e))
}

/// Default output directory for a scenario.
pub fn default_dir(scenario: Scenario) -> std::path::PathBuf {
    Path::new("out").join(scenario.name())
}
