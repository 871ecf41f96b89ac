use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use qhul_core::io::ExperimentConfig;
use qhul_core::io::{pfm, CsvTable};
use qhul_core::Grid;
use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of the seed plus every
/// result-affecting setting. The output directory is excluded.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let text = format!("seed = {}\n{}", config.seed, config.serialize_experiment());
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    pub version: &'static str,
}

impl Provenance {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            command: command.to_string(),
            seed: config.seed,
            config_hash: config_hash(config),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "qhul {} command={} seed={} config_hash={}",
            self.version, self.command, self.seed, self.config_hash
        )
    }
}

pub fn write_csv(path: PathBuf, table: &CsvTable, files: &mut Vec<PathBuf>) -> Result<()> {
    table
        .write(&path)
        .with_context(|| format!("writing {}", path.display()))?;
    files.push(path);
    Ok(())
}

pub fn write_pfm(path: PathBuf, grid: &Grid<f64>, files: &mut Vec<PathBuf>) -> Result<()> {
    pfm::write(&path, grid).with_context(|| format!("writing {}", path.display()))?;
    files.push(path);
    Ok(())
}

/// Float maps cannot carry a comment line, so the manifest records their
/// provenance.
pub fn write_manifest(path: &Path, provenance: &Provenance, files: &[PathBuf]) -> Result<()> {
    let mut text = format!("# {provenance}\n");
    for f in files {
        let name = f
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        text.push_str(&name);
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
