//! Run configuration: a flat JSON document with fail-closed parsing.
//! Unknown keys are rejected so a typo in a tolerance name cannot silently
//! fall back to a default.

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use nsbox_core::solver::Scheme;
use nsbox_core::{BoxDomain, Flavor};

use crate::error::CliError;

fn default_flavor() -> String {
    "periodic".into()
}
fn default_initial() -> String {
    "single_mode".into()
}
fn default_scheme() -> String {
    "rk4".into()
}
fn default_amplitude() -> f64 {
    1.0
}
fn default_t_end() -> f64 {
    1.0
}
fn default_sample_every() -> usize {
    1
}
fn default_envelope_tol() -> f64 {
    1e-6
}
fn default_contraction_tol() -> f64 {
    1e-10
}
fn default_ut_tol() -> f64 {
    1e-6
}
fn default_c1() -> f64 {
    3.0
}
fn default_certificate() -> String {
    "existence".into()
}
fn default_trials() -> usize {
    500
}
fn default_c1_iterations() -> usize {
    150
}
fn default_c1_restarts() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional experiment kind; when present it must match the
    /// subcommand being run.
    #[serde(default)]
    pub experiment: Option<String>,
    /// Optional dimension check against `sides.len()`.
    #[serde(default)]
    pub dim: Option<usize>,
    pub sides: Vec<f64>,
    #[serde(default = "default_flavor")]
    pub flavor: String,
    pub cutoff: usize,
    pub nu: f64,
    /// Named preset (`single_mode`, `taylor_green`, `random`) or a path to
    /// a stored field document.
    #[serde(default = "default_initial")]
    pub initial: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Rescale the initial data to this V-norm after construction.
    #[serde(default)]
    pub target_vnorm: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Time step; defaults to a quarter of the RK4 linear stability bound.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
    #[serde(default = "default_envelope_tol")]
    pub envelope_tol: f64,
    #[serde(default = "default_contraction_tol")]
    pub contraction_tol: f64,
    #[serde(default = "default_ut_tol")]
    pub ut_tol: f64,
    /// Embedding constant used by the existence certificate.
    #[serde(default = "default_c1")]
    pub c1: f64,
    /// Which certificate gates the `certify` exit status:
    /// `existence`, `regularity` or `both`.
    #[serde(default = "default_certificate")]
    pub certificate: String,
    /// Seed of the second trajectory in `perturbation`; defaults to
    /// `seed + 1` for the random preset.
    #[serde(default)]
    pub second_seed: Option<u64>,
    /// Batch size for `check-inequalities`.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_c1_iterations")]
    pub c1_iterations: usize,
    #[serde(default = "default_c1_restarts")]
    pub c1_restarts: usize,
}

impl RunConfig {
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut config: RunConfig = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        config.validate()?;
        Ok((config, bytes))
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(dim) = self.dim {
            if dim != self.sides.len() {
                return Err(CliError::Usage(format!(
                    "config field `dim` is {dim} but `sides` has {} entries",
                    self.sides.len()
                )));
            }
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(CliError::Usage(format!(
                "config field `nu` must be positive, got {}",
                self.nu
            )));
        }
        if self.cutoff < 1 {
            return Err(CliError::Usage("config field `cutoff` must be >= 1".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(CliError::Usage(format!(
                "config field `t_end` must be positive, got {}",
                self.t_end
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(CliError::Usage(format!(
                    "config field `dt` must be positive, got {dt}"
                )));
            }
        }
        for (name, v) in [
            ("envelope_tol", self.envelope_tol),
            ("contraction_tol", self.contraction_tol),
            ("ut_tol", self.ut_tol),
            ("c1", self.c1),
            ("amplitude", self.amplitude),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!(
                    "config field `{name}` must be positive, got {v}"
                )));
            }
        }
        if let Some(t) = self.target_vnorm {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!(
                    "config field `target_vnorm` must be positive, got {t}"
                )));
            }
        }
        if !matches!(self.certificate.as_str(), "existence" | "regularity" | "both") {
            return Err(CliError::Usage(format!(
                "config field `certificate` must be existence | regularity | both, got `{}`",
                self.certificate
            )));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<BoxDomain, CliError> {
        let flavor = match self.flavor.as_str() {
            "periodic" => Flavor::Periodic,
            "freeslip" => Flavor::Freeslip,
            other => {
                return Err(CliError::Usage(format!(
                    "config field `flavor` must be periodic | freeslip, got `{other}`"
                )))
            }
        };
        BoxDomain::new(&self.sides, flavor)
            .map_err(|e| CliError::Usage(format!("config field `sides`: {e}")))
    }

    pub fn scheme(&self) -> Result<Scheme, CliError> {
        Scheme::from_str(&self.scheme)
            .map_err(|e| CliError::Usage(format!("config field `scheme`: {e}")))
    }

    pub fn expect_experiment(&self, subcommand: &str) -> Result<(), CliError> {
        if let Some(kind) = &self.experiment {
            if kind != subcommand {
                return Err(CliError::Usage(format!(
                    "config declares experiment `{kind}` but subcommand `{subcommand}` was invoked"
                )));
            }
        }
        Ok(())
    }
}
