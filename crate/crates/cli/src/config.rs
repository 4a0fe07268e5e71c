//! Job configuration: an optional JSON file overlaid by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use arveson_core::numerics::Tolerances;
use arveson_core::sampling::SampleConfig;
use serde::Deserialize;

use crate::io::InputError;

/// Settings that may come from `--config`; every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub radius: Option<f64>,
    pub tol_rank: Option<f64>,
    pub tol_psd: Option<f64>,
    pub tol_eq: Option<f64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self, InputError> {
        let text = fs::read_to_string(path).map_err(|e| InputError::Io {
            file: path.to_path_buf(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| InputError::Parse {
            file: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Fields set in `other` win.
    pub fn overlay(self, other: ConfigFile) -> ConfigFile {
        ConfigFile {
            seed: other.seed.or(self.seed),
            samples: other.samples.or(self.samples),
            radius: other.radius.or(self.radius),
            tol_rank: other.tol_rank.or(self.tol_rank),
            tol_psd: other.tol_psd.or(self.tol_psd),
            tol_eq: other.tol_eq.or(self.tol_eq),
            threads: other.threads.or(self.threads),
            out: other.out.or(self.out),
        }
    }
}

/// Fully resolved and validated settings for one run.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub sampling: SampleConfig,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl JobConfig {
    pub fn resolve(command: &str, inputs: Vec<PathBuf>, settings: ConfigFile) -> Result<Self, InputError> {
        let defaults = SampleConfig::default();
        let tol = Tolerances {
            rank_tol: settings.tol_rank.unwrap_or(defaults.tolerances.rank_tol),
            psd_tol: settings.tol_psd.unwrap_or(defaults.tolerances.psd_tol),
            eq_tol: settings.tol_eq.unwrap_or(defaults.tolerances.eq_tol),
        };
        let sampling = SampleConfig {
            tolerances: tol,
            sample_count: settings.samples.unwrap_or(defaults.sample_count),
            sample_radius: settings.radius.unwrap_or(defaults.sample_radius),
            seed: settings.seed.unwrap_or(defaults.seed),
        };
        sampling.validate().map_err(|e| InputError::Config(e.to_string()))?;
        let threads = settings.threads.unwrap_or(1);
        if threads == 0 {
            return Err(InputError::Config("threads must be at least 1".into()));
        }
        Ok(JobConfig {
            command: command.to_string(),
            inputs,
            sampling,
            threads,
            out: settings.out,
        })
    }
}
