//! Batch front end for frequency-occlusion attribution: file formats,
//! run manifests, the six CLI verbs and SVG chart emission.

pub mod commands;
pub mod config;
pub mod dataset_io;
pub mod error;
pub mod manifest;
pub mod map_io;
pub mod model_io;
pub mod report;
pub mod svg;

use config::{Command, RunConfig};
use error::{CliError, Result};

/// Resolves the configuration of `command`, runs it on a pool of
/// `--workers` threads and returns the summary.
pub fn execute(command: &Command) -> Result<String> {
    let args = command.args();
    let cfg = RunConfig::resolve(command.verb(), args)?;
    if args.workers == Some(0) {
        return Err(CliError::Config("--workers must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    commands::run(&cfg, &pool)
}
