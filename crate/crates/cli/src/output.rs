//! Report plumbing: self-describing metadata, deterministic writers.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use nsbox_core::solver::{GalerkinSystem, TrajectoryRecord};

use crate::error::CliError;

/// Common header embedded in every JSON report so outputs are
/// self-describing and reproducible: the config hash, the seed, and the
/// guaranteed decay rates of the run.
#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub experiment: String,
    pub config_sha256: String,
    pub seed: u64,
    pub nu: f64,
    pub chi: f64,
    pub lambda_min: f64,
    /// `2 nu min(chi, lambda_min)`
    pub guaranteed_rate_l2: f64,
    /// `nu min(chi, lambda_min)`
    pub guaranteed_rate_v: f64,
}

impl ReportMeta {
    pub fn new(experiment: &str, config_bytes: &[u8], seed: u64, system: &GalerkinSystem) -> Self {
        let chi = system.chi();
        let lambda_min = system.lambda_min();
        let floor = chi.min(lambda_min);
        Self {
            experiment: experiment.to_string(),
            config_sha256: sha256_hex(config_bytes),
            seed,
            nu: system.nu(),
            chi,
            lambda_min,
            guaranteed_rate_l2: 2.0 * system.nu() * floor,
            guaranteed_rate_v: system.nu() * floor,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("serializing {name}: {e}")))?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    pub fn write_trajectory(
        &self,
        name: &str,
        rec: &TrajectoryRecord,
    ) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        std::fs::write(&path, rec.to_csv_string())?;
        Ok(path)
    }

    pub fn write_csv(
        &self,
        name: &str,
        header: &str,
        rows: impl Iterator<Item = Vec<f64>>,
    ) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = String::new();
        text.push_str(header);
        text.push('\n');
        for row in rows {
            let cols: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            text.push_str(&cols.join(","));
            text.push('\n');
        }
        std::fs::write(&path, text)?;
        Ok(path)
    }
}
