//! Run configuration for the command-line tool.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable naming a config file used when none is given.
pub const CONFIG_ENV: &str = "SUPERMAP_CONFIG";

/// Seed, trial count, tolerance and size cap shared by the commands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    /// Cap on the product of all factor dimensions of any process handled.
    pub max_total_dim: usize,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200,
            tol: 1e-8,
            max_total_dim: 64,
            input: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, or the file named by [`CONFIG_ENV`], or falls back to
    /// the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        match path.map(Path::to_path_buf).or(from_env) {
            Some(p) => Self::from_toml(&std::fs::read_to_string(p)?),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Parse(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.trials == 0 {
            return Err(Error::Parse("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Fails when `total` exceeds the configured cap.
    pub fn check_size(&self, total: usize) -> Result<()> {
        if total > self.max_total_dim {
            return Err(Error::TooLarge {
                total,
                max: self.max_total_dim,
            });
        }
        Ok(())
    }
}
