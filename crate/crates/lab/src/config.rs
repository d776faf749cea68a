//! Run configuration: defaults, a JSON config file and command-line overrides, in that order.

use std::path::{Path, PathBuf};

use loewner_core::energy::DEFAULT_EPS_SCHEDULE;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const CONFIG_ENV: &str = "LOEWNER_LAB_CONFIG";
pub const DEFAULT_STEPS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Convergence tolerance handed to the minimizers; `None` keeps each solver's default.
    pub tolerance: Option<f64>,
    pub steps_per_unit: usize,
    pub eps_schedule: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: None,
            steps_per_unit: DEFAULT_STEPS,
            eps_schedule: DEFAULT_EPS_SCHEDULE.to_vec(),
            seed: 0,
            output_dir: PathBuf::from("."),
        }
    }
}

/// Where the ε schedule of a run came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleSource {
    Default,
    ConfigFile,
    Flag,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    tolerance: Option<f64>,
    steps_per_unit: Option<usize>,
    eps_schedule: Option<Vec<f64>>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub tolerance: Option<f64>,
    pub steps: Option<usize>,
    pub eps_schedule: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Resolves the configuration. An explicit `--config` wins over the environment variable.
    pub fn resolve(o: &Overrides, env_path: Option<PathBuf>) -> Result<(RunConfig, ScheduleSource)> {
        let mut cfg = RunConfig::default();
        let mut source = ScheduleSource::Default;
        if let Some(path) = o.config.clone().or(env_path) {
            let file = read_config(&path)?;
            if let Some(t) = file.tolerance {
                cfg.tolerance = Some(t);
            }
            if let Some(s) = file.steps_per_unit {
                cfg.steps_per_unit = s;
            }
            if let Some(e) = file.eps_schedule {
                cfg.eps_schedule = e;
                source = ScheduleSource::ConfigFile;
            }
            if let Some(s) = file.seed {
                cfg.seed = s;
            }
            if let Some(d) = file.output_dir {
                cfg.output_dir = d;
            }
        }
        if let Some(t) = o.tolerance {
            cfg.tolerance = Some(t);
        }
        if let Some(s) = o.steps {
            cfg.steps_per_unit = s;
        }
        if let Some(e) = &o.eps_schedule {
            cfg.eps_schedule = e.clone();
            source = ScheduleSource::Flag;
        }
        if let Some(s) = o.seed {
            cfg.seed = s;
        }
        if let Some(d) = &o.out {
            cfg.output_dir = d.clone();
        }
        cfg.validate()?;
        Ok((cfg, source))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(LabError::input("tolerance must be positive"));
            }
        }
        if self.steps_per_unit == 0 {
            return Err(LabError::input("steps per unit must be positive"));
        }
        let e = &self.eps_schedule;
        if e.is_empty() || e.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(LabError::input("eps schedule must be non-empty and positive"));
        }
        if e.windows(2).any(|w| w[1] >= w[0]) {
            return Err(LabError::input("eps schedule must be strictly decreasing"));
        }
        Ok(())
    }
}

fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::input(format!("{}: {e}", path.display())))
}
