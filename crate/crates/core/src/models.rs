//! Black-box classifiers with forward-pass accounting.
//!
//! Every model produces raw class scores (logits); [`ClassifierOracle`]
//! turns them into softmax probabilities and counts each evaluation.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::signal::{channelwise_fft, independent_bins, Spectrum, TimeSeries};

/// A classifier over fixed-shape time series.
pub trait Model: Send + Sync {
    fn num_classes(&self) -> usize;
    fn input_length(&self) -> usize;
    fn input_channels(&self) -> usize;

    /// Raw per-class scores. Called only with correctly shaped input.
    fn logits(&self, x: &TimeSeries) -> Vec<f64>;

    /// Whether [`Model::logits`] are meaningful pre-softmax scores rather
    /// than log-probabilities reconstructed from a probability-only model.
    fn exposes_logits(&self) -> bool {
        true
    }
}

/// Which target score the robustness metrics read from the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ScoreMode {
    Probability,
    Logit,
}

impl ScoreMode {
    /// Logits when the model exposes them, probabilities otherwise.
    pub fn auto(oracle: &ClassifierOracle) -> Self {
        if oracle.exposes_logits() {
            ScoreMode::Logit
        } else {
            ScoreMode::Probability
        }
    }
}

pub struct ClassifierOracle {
    model: Box<dyn Model>,
    forward_passes: AtomicU64,
}

impl core::fmt::Debug for ClassifierOracle {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ClassifierOracle")
            .field("num_classes", &self.num_classes())
            .field("input_length", &self.input_length())
            .field("input_channels", &self.input_channels())
            .field("forward_passes", &self.forward_pass_count())
            .finish()
    }
}

impl ClassifierOracle {
    pub fn new(model: impl Model + 'static) -> Self {
        Self::from_boxed(Box::new(model))
    }

    pub fn from_boxed(model: Box<dyn Model>) -> Self {
        Self {
            model,
            forward_passes: AtomicU64::new(0),
        }
    }

    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self::from_boxed(spec.into_model()))
    }

    pub fn num_classes(&self) -> usize {
        self.model.num_classes()
    }

    pub fn input_length(&self) -> usize {
        self.model.input_length()
    }

    pub fn input_channels(&self) -> usize {
        self.model.input_channels()
    }

    pub fn exposes_logits(&self) -> bool {
        self.model.exposes_logits()
    }

    pub fn forward_pass_count(&self) -> u64 {
        self.forward_passes.load(Ordering::Relaxed)
    }

    pub fn reset_forward_passes(&self) {
        self.forward_passes.store(0, Ordering::Relaxed);
    }

    pub fn check_dims(&self, x: &TimeSeries) -> Result<()> {
        if x.length() != self.input_length() || x.channels() != self.input_channels() {
            return Err(Error::DimensionMismatch {
                expected_length: self.input_length(),
                expected_channels: self.input_channels(),
                length: x.length(),
                channels: x.channels(),
            });
        }
        Ok(())
    }

    /// One forward pass returning raw scores.
    pub fn logits(&self, x: &TimeSeries) -> Result<Vec<f64>> {
        self.check_dims(x)?;
        self.forward_passes.fetch_add(1, Ordering::Relaxed);
        Ok(self.model.logits(x))
    }

    /// One forward pass returning softmax class probabilities.
    pub fn predict(&self, x: &TimeSeries) -> Result<Vec<f64>> {
        self.logits(x).map(|l| softmax(&l))
    }

    /// One forward pass returning only the score of `class`.
    pub fn target_score(&self, x: &TimeSeries, class: usize, mode: ScoreMode) -> Result<f64> {
        let logits = self.logits(x)?;
        Ok(match mode {
            ScoreMode::Logit => logits[class],
            ScoreMode::Probability => softmax(&logits)[class],
        })
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| libm::exp(l - max)).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Index of the largest entry; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DenseLayer {
    /// `outputs x inputs`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn apply(&self, input: &[f64]) -> Vec<f64> {
        Self::apply_rows(&self.weights, &self.bias, input)
    }
}

/// Fires when the spectral energy of `channel` over bins
/// `bin_low..=bin_high` exceeds `threshold`.
///
/// Energy is measured in squared amplitude: a unit sinusoid sitting exactly
/// on bin `k` (with `0 < k < t/2`) contributes 1.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BandRule {
    pub class: usize,
    pub channel: usize,
    pub bin_low: usize,
    pub bin_high: usize,
    pub threshold: f64,
}

impl BandRule {
    pub fn bins(&self) -> core::ops::RangeInclusive<usize> {
        self.bin_low..=self.bin_high
    }
}

#[cfg(feature = "serde")]
fn default_gain() -> f64 {
    DEFAULT_BANDPOWER_GAIN
}

pub const DEFAULT_BANDPOWER_GAIN: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum ModelParams {
    /// `weights` is `classes x (length * channels)`, input flattened step-major.
    Linear { weights: Vec<Vec<f64>>, bias: Vec<f64> },
    /// Dense layers with ReLU between them; the last layer emits the logits.
    Mlp { layers: Vec<DenseLayer> },
    /// Logit of class `c` is `gain * sum(energy - threshold)` over the rules
    /// of `c`; classes without rules sit at logit 0.
    Bandpower {
        rules: Vec<BandRule>,
        #[cfg_attr(feature = "serde", serde(default = "default_gain"))]
        gain: f64,
    },
}

impl ModelParams {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelParams::Linear { .. } => "linear",
            ModelParams::Mlp { .. } => "mlp",
            ModelParams::Bandpower { .. } => "bandpower",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub num_classes: usize,
    pub input_length: usize,
    pub input_channels: usize,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub params: ModelParams,
}

fn check_finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(String::from(name)))
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        let c = self.num_classes;
        let (t, s) = (self.input_length, self.input_channels);
        if c < 2 {
            return Err(Error::ShapeInconsistency(format!("num_classes must be >= 2, got {c}")));
        }
        if t == 0 || s == 0 {
            return Err(Error::ShapeInconsistency(format!("input shape {t}x{s} is empty")));
        }
        let features = t * s;
        match &self.params {
            ModelParams::Linear { weights, bias } => {
                if weights.len() != c {
                    return Err(Error::ShapeInconsistency(format!(
                        "linear weights have {} rows, expected {c}",
                        weights.len()
                    )));
                }
                if let Some(row) = weights.iter().position(|r| r.len() != features) {
                    return Err(Error::ShapeInconsistency(format!(
                        "linear weight row {row} has {} columns, expected {features}",
                        weights[row].len()
                    )));
                }
                if bias.len() != c {
                    return Err(Error::ShapeInconsistency(format!(
                        "linear bias has {} entries, expected {c}",
                        bias.len()
                    )));
                }
                for row in weights {
                    check_finite("linear weights", row)?;
                }
                check_finite("linear bias", bias)?;
            }
            ModelParams::Mlp { layers } => {
                if layers.is_empty() {
                    return Err(Error::ShapeInconsistency("mlp has no layers".into()));
                }
                let mut width = features;
                for (i, layer) in layers.iter().enumerate() {
                    if layer.weights.is_empty() || layer.weights.len() != layer.bias.len() {
                        return Err(Error::ShapeInconsistency(format!(
                            "mlp layer {i}: {} weight rows vs {} biases",
                            layer.weights.len(),
                            layer.bias.len()
                        )));
                    }
                    if layer.weights.iter().any(|r| r.len() != width) {
                        return Err(Error::ShapeInconsistency(format!(
                            "mlp layer {i}: expected {width} inputs per row"
                        )));
                    }
                    for row in &layer.weights {
                        check_finite("mlp weights", row)?;
                    }
                    check_finite("mlp bias", &layer.bias)?;
                    width = layer.weights.len();
                }
                if width != c {
                    return Err(Error::ShapeInconsistency(format!(
                        "mlp emits {width} outputs, expected {c}"
                    )));
                }
            }
            ModelParams::Bandpower { rules, gain } => {
                if rules.is_empty() {
                    return Err(Error::InvalidSpec("bandpower model has no rules".into()));
                }
                if !gain.is_finite() {
                    return Err(Error::NonFinite("bandpower gain".into()));
                }
                if *gain <= 0.0 {
                    return Err(Error::InvalidSpec(format!("bandpower gain must be > 0, got {gain}")));
                }
                let max_bin = independent_bins(t) - 1;
                for (i, rule) in rules.iter().enumerate() {
                    if rule.class >= c {
                        return Err(Error::ShapeInconsistency(format!(
                            "rule {i} targets class {} of {c}",
                            rule.class
                        )));
                    }
                    if rule.channel >= s {
                        return Err(Error::ShapeInconsistency(format!(
                            "rule {i} reads channel {} of {s}",
                            rule.channel
                        )));
                    }
                    if rule.bin_low > rule.bin_high || rule.bin_high > max_bin {
                        return Err(Error::ShapeInconsistency(format!(
                            "rule {i} band {}..={} outside 0..={max_bin}",
                            rule.bin_low, rule.bin_high
                        )));
                    }
                    check_finite("bandpower threshold", &[rule.threshold])?;
                }
            }
        }
        Ok(())
    }

    fn into_model(self) -> Box<dyn Model> {
        let shape = Shape {
            classes: self.num_classes,
            length: self.input_length,
            channels: self.input_channels,
        };
        match self.params {
            ModelParams::Linear { weights, bias } => Box::new(LinearModel { shape, weights, bias }),
            ModelParams::Mlp { layers } => Box::new(MlpModel { shape, layers }),
            ModelParams::Bandpower { rules, gain } => Box::new(BandpowerModel { shape, rules, gain }),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Shape {
    classes: usize,
    length: usize,
    channels: usize,
}

macro_rules! shape_accessors {
    () => {
        fn num_classes(&self) -> usize {
            self.shape.classes
        }
        fn input_length(&self) -> usize {
            self.shape.length
        }
        fn input_channels(&self) -> usize {
            self.shape.channels
        }
    };
}

struct LinearModel {
    shape: Shape,
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl Model for LinearModel {
    shape_accessors!();

    fn logits(&self, x: &TimeSeries) -> Vec<f64> {
        DenseLayer::apply_rows(&self.weights, &self.bias, x.values())
    }
}

impl DenseLayer {
    fn apply_rows(weights: &[Vec<f64>], bias: &[f64], input: &[f64]) -> Vec<f64> {
        weights
            .iter()
            .zip(bias)
            .map(|(row, b)| row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }
}

struct MlpModel {
    shape: Shape,
    layers: Vec<DenseLayer>,
}

impl Model for MlpModel {
    shape_accessors!();

    fn logits(&self, x: &TimeSeries) -> Vec<f64> {
        let mut activation = x.values().to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            activation = layer.apply(&activation);
            if i != last {
                for a in &mut activation {
                    *a = a.max(0.0);
                }
            }
        }
        activation
    }
}

struct BandpowerModel {
    shape: Shape,
    rules: Vec<BandRule>,
    gain: f64,
}

/// Squared-amplitude energy of `spectrum` over `bins`.
pub fn band_energy(spectrum: &Spectrum, bins: core::ops::RangeInclusive<usize>) -> f64 {
    let t = spectrum.origin_length();
    bins.map(|k| {
        let weight = if k == 0 || 2 * k == t { 1.0 } else { 2.0 };
        let amp = weight * spectrum.bins()[k].norm() / t as f64;
        amp * amp
    })
    .sum()
}

impl Model for BandpowerModel {
    shape_accessors!();

    fn logits(&self, x: &TimeSeries) -> Vec<f64> {
        let spectra = channelwise_fft(x);
        let mut logits = vec![0.0; self.shape.classes];
        for rule in &self.rules {
            let energy = band_energy(&spectra[rule.channel], rule.bins());
            logits[rule.class] += self.gain * (energy - rule.threshold);
        }
        logits
    }
}

/// Oracle whose decision depends only on the listed frequency bands.
pub fn make_bandpower_oracle(
    rules: Vec<BandRule>,
    num_classes: usize,
    input_length: usize,
    input_channels: usize,
    gain: f64,
) -> Result<ClassifierOracle> {
    ClassifierOracle::from_spec(ModelSpec {
        num_classes,
        input_length,
        input_channels,
        params: ModelParams::Bandpower { rules, gain },
    })
}
