//! Command-line flags and the run configuration they resolve to.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use freqatt_core::metrics::{DeletionSpace, DeletionSteps, MetricConfig, MetricKind};
use freqatt_core::{Baseline, MaskPolicy, Method, OcclusionConfig, SyntheticSpec};
use serde::{Deserialize, Serialize};

use crate::dataset_io::DatasetFormat;
use crate::error::{CliError, Result};
use crate::manifest::Manifest;
use crate::report::{parse_space, parse_steps};

#[derive(Debug, Parser)]
#[command(name = "freqatt", version, about = "Frequency-occlusion attribution for time-series classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one attribution map per sample and method.
    Attribute(RunArgs),
    /// Filter samples toward their predicted class and measure how far each
    /// sample moves when filtered toward every class.
    Optimize(RunArgs),
    /// Deletion AUC, infidelity, sensitivity and continuity per sample and method.
    Evaluate(RunArgs),
    /// Average-rank tables across the datasets of several evaluations.
    Compare(RunArgs),
    /// CSV and SVG charts from evaluation and optimization outputs.
    Report(RunArgs),
    /// Synthetic band-limited dataset plus the model that separates it.
    Generate(RunArgs),
}

impl Command {
    pub fn verb(&self) -> Verb {
        match self {
            Command::Attribute(_) => Verb::Attribute,
            Command::Optimize(_) => Verb::Optimize,
            Command::Evaluate(_) => Verb::Evaluate,
            Command::Compare(_) => Verb::Compare,
            Command::Report(_) => Verb::Report,
            Command::Generate(_) => Verb::Generate,
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Attribute(a)
            | Command::Optimize(a)
            | Command::Evaluate(a)
            | Command::Compare(a)
            | Command::Report(a)
            | Command::Generate(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verb {
    Attribute,
    Optimize,
    Evaluate,
    Compare,
    Report,
    Generate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    Zero,
    Mean,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Dataset file (delimited, or multivariate with an `@shape` header).
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Dataset format; detected from the file when omitted.
    #[arg(long)]
    pub format: Option<DatasetFormat>,
    /// Model document (JSON).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Comma-separated attribution methods.
    #[arg(long, value_delimiter = ',', default_value = "occlusion,frequency,combined,random")]
    pub methods: Vec<String>,
    /// Occlusion window, in steps or bins.
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    /// Occlusion stride; defaults to the window.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, value_enum, default_value = "zero")]
    pub baseline: BaselineArg,
    /// `soft`, `topk:K` or `threshold:T`.
    #[arg(long, default_value = "soft")]
    pub mask: String,
    /// Comma-separated metrics.
    #[arg(long, value_delimiter = ',', default_value = "auc,infidelity,sensitivity,continuity")]
    pub metrics: Vec<String>,
    /// Infidelity noise scale, relative to each channel's standard deviation.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Perturbations per sample for infidelity and sensitivity.
    #[arg(long, default_value_t = 16)]
    pub n_perturb: usize,
    /// Sensitivity perturbation radius (L-infinity).
    #[arg(long, default_value_t = 0.05)]
    pub radius: f64,
    /// Deletion curve points (>= 2) or `per-unit`.
    #[arg(long, default_value = "50")]
    pub steps: String,
    /// Deletion space: `input` or `frequency`.
    #[arg(long, default_value = "input")]
    pub space: String,
    /// Stratified subsample size; all samples when omitted.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Z-normalize every channel of every sample after loading.
    #[arg(long)]
    pub znorm: bool,
    /// Result directories to read (compare, report).
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// Directory of saved maps to evaluate instead of recomputing them.
    #[arg(long)]
    pub maps: Option<PathBuf>,
    /// Synthetic dataset recipe (JSON) for `generate`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Noise standard deviation for `generate`.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Re-run the configuration recorded in a manifest.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long, short)]
    pub quiet: bool,
}

/// Everything that determines a run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub verb: Verb,
    pub dataset: Option<PathBuf>,
    pub format: Option<DatasetFormat>,
    pub model: Option<PathBuf>,
    pub methods: Vec<Method>,
    pub occlusion: OcclusionConfig,
    pub mask: MaskPolicy,
    pub metrics: Vec<MetricKind>,
    pub metric_config: MetricConfig,
    pub samples: Option<usize>,
    pub seed: u64,
    /// Not recorded, so reruns into another directory reproduce the
    /// manifest byte for byte.
    #[serde(skip)]
    pub out: PathBuf,
    pub znorm: bool,
    pub inputs: Vec<PathBuf>,
    pub maps: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
}

pub fn parse_mask(s: &str) -> Result<MaskPolicy, String> {
    let bad = || format!("mask must be `soft`, `topk:K` or `threshold:T`, got `{s}`");
    match s.split_once(':') {
        None if s == "soft" => Ok(MaskPolicy::Soft),
        Some(("topk", k)) => k.parse().map(MaskPolicy::TopK).map_err(|_| bad()),
        Some(("threshold", t)) => t.parse().map(MaskPolicy::Threshold).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn config_err(message: String) -> CliError {
    CliError::Config(message)
}

impl RunConfig {
    /// Resolves the flags of `verb`, or loads the configuration recorded in
    /// the manifest named by `--config`. `--out` is always taken from the
    /// command line.
    pub fn resolve(verb: Verb, args: &RunArgs) -> Result<Self> {
        if let Some(path) = &args.config {
            let manifest = Manifest::load(path)?;
            let mut cfg = manifest.config;
            if cfg.verb != verb {
                return Err(config_err(format!(
                    "{} records a `{:?}` run, not `{verb:?}`",
                    path.display(),
                    cfg.verb
                )));
            }
            cfg.out = args
                .out
                .clone()
                .ok_or_else(|| config_err("--out is required".into()))?;
            cfg.validate()?;
            return Ok(cfg);
        }

        let methods = args
            .methods
            .iter()
            .map(|m| Method::parse(m.trim()).ok_or_else(|| config_err(format!("unknown method `{m}`"))))
            .collect::<Result<Vec<_>>>()?;
        let metrics = args
            .metrics
            .iter()
            .map(|m| MetricKind::parse(m.trim()).ok_or_else(|| config_err(format!("unknown metric `{m}`"))))
            .collect::<Result<Vec<_>>>()?;
        let steps: DeletionSteps = parse_steps(&args.steps).map_err(config_err)?;
        let space: DeletionSpace = parse_space(&args.space).map_err(config_err)?;
        let mask = parse_mask(&args.mask).map_err(config_err)?;
        let out = args
            .out
            .clone()
            .ok_or_else(|| config_err("--out is required".into()))?;

        let synthetic = if verb == Verb::Generate {
            let mut spec = match &args.spec {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))?
                }
                None => SyntheticSpec::default(),
            };
            spec.seed = args.seed;
            if let Some(count) = args.samples {
                spec.count = count;
            }
            if let Some(noise) = args.noise {
                spec.noise_sigma = noise;
            }
            Some(spec)
        } else {
            None
        };

        let cfg = RunConfig {
            verb,
            dataset: args.dataset.clone(),
            format: args.format,
            model: args.model.clone(),
            methods,
            occlusion: OcclusionConfig {
                window: args.window,
                stride: args.stride,
                baseline: match args.baseline {
                    BaselineArg::Zero => Baseline::Zero,
                    BaselineArg::Mean => Baseline::ChannelMean,
                },
                target: None,
            },
            mask,
            metrics,
            metric_config: MetricConfig {
                sigma: args.sigma,
                n_perturb: args.n_perturb,
                radius: args.radius,
                steps,
                space,
                seed: args.seed,
            },
            samples: if verb == Verb::Generate { None } else { args.samples },
            seed: args.seed,
            out,
            znorm: args.znorm,
            inputs: args.input.clone(),
            maps: args.maps.clone(),
            synthetic,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parameter and path checks that need no file contents.
    pub fn validate(&self) -> Result<()> {
        let need = |flag: &str, path: &Option<PathBuf>| -> Result<()> {
            match path {
                None => Err(config_err(format!("--{flag} is required for {:?}", self.verb))),
                Some(p) => require_exists(p),
            }
        };
        match self.verb {
            Verb::Attribute | Verb::Optimize | Verb::Evaluate => {
                need("dataset", &self.dataset)?;
                need("model", &self.model)?;
            }
            Verb::Compare | Verb::Report => {
                if self.inputs.is_empty() {
                    return Err(config_err(format!("--input is required for {:?}", self.verb)));
                }
                self.inputs.iter().try_for_each(|p| require_exists(p))?;
            }
            Verb::Generate => {}
        }
        if let Some(maps) = &self.maps {
            require_exists(maps)?;
        }
        if self.methods.is_empty() {
            return Err(config_err("no methods selected".into()));
        }
        if self.metrics.is_empty() {
            return Err(config_err("no metrics selected".into()));
        }
        if self.occlusion.window == 0 || self.occlusion.stride == Some(0) {
            return Err(config_err("window and stride must be >= 1".into()));
        }
        let m = &self.metric_config;
        if !(m.sigma > 0.0 && m.sigma.is_finite()) || !(m.radius > 0.0 && m.radius.is_finite()) {
            return Err(config_err("sigma and radius must be positive".into()));
        }
        if m.n_perturb == 0 {
            return Err(config_err("--n-perturb must be >= 1".into()));
        }
        if self.samples == Some(0) {
            return Err(config_err("--samples must be >= 1".into()));
        }
        if let Some(spec) = &self.synthetic {
            spec.validate()?;
        }
        Ok(())
    }
}

fn require_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory")))
    }
}
