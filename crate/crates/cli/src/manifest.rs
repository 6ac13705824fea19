//! Run manifest and the SUCCESS marker.
//!
//! A run writes `manifest.json` before any result and `SUCCESS` after the
//! last one. A directory without `SUCCESS` holds a failed or interrupted run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUCCESS_FILE: &str = "SUCCESS";

/// Every seed a run draws from, echoed for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub run: u64,
    /// Stratified subsampling, when `samples` is set.
    pub subsample: Option<u64>,
    /// Perturbations of infidelity and sensitivity.
    pub perturbation: u64,
    /// Random baseline maps; each sample mixes in its id.
    pub random_maps: u64,
    /// Phases and noise of generated data.
    pub synthetic: Option<u64>,
}

impl Seeds {
    pub fn of(cfg: &RunConfig) -> Self {
        Self {
            run: cfg.seed,
            subsample: cfg.samples.map(|_| cfg.seed),
            perturbation: cfg.metric_config.seed,
            random_maps: cfg.metric_config.seed,
            synthetic: cfg.synthetic.as_ref().map(|s| s.seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub config: RunConfig,
    pub seeds: Seeds,
}

impl Manifest {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: freqatt_core::VERSION.into(),
            config: cfg.clone(),
            seeds: Seeds::of(cfg),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
    }
}

/// The output directory of one run.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    /// Creates the directory, clears a stale SUCCESS marker and writes the
    /// manifest.
    pub fn prepare(cfg: &RunConfig) -> Result<Self> {
        let root = cfg.out.clone();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        let marker = root.join(SUCCESS_FILE);
        if marker.exists() {
            fs::remove_file(&marker).map_err(|e| CliError::io(&marker, e))?;
        }
        let path = root.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&Manifest::new(cfg)).map_err(|e| CliError::format(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok(Self { root })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Creates (if needed) and returns a subdirectory.
    pub fn subdir(&self, name: &str) -> Result<PathBuf> {
        let dir = self.root.join(name);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(dir)
    }

    pub fn finish(self) -> Result<()> {
        let marker = self.root.join(SUCCESS_FILE);
        fs::write(&marker, "").map_err(|e| CliError::io(&marker, e))
    }
}
