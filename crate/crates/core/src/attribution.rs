//! Occlusion attribution in the input space and in the frequency space.
//!
//! Relevance is always the *drop* of the target-class probability when a
//! region is occluded (`score(x) - score(occluded x)`), so positive values
//! support the class.
//!
//! Frequency occlusion works on the `floor(t/2) + 1` independent bins of each
//! channel. Occluding bin `k` also zeroes its conjugate mirror `t - k`, which
//! keeps every reconstructed signal real.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::{argmax, ClassifierOracle};
use crate::signal::{apply_bin_gains, channelwise_fft, independent_bins, Spectrum, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Domain {
    #[cfg_attr(feature = "serde", serde(rename = "input-space"))]
    Input,
    #[cfg_attr(feature = "serde", serde(rename = "frequency-space"))]
    Frequency,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Input => "input-space",
            Domain::Frequency => "frequency-space",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    Occlusion,
    Frequency,
    Combined,
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Occlusion, Method::Frequency, Method::Combined, Method::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Occlusion => "occlusion",
            Method::Frequency => "frequency",
            Method::Combined => "combined",
            Method::Random => "random",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.as_str() == name)
    }
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.pad(self.as_str())
    }
}

/// Fill value for occluded input positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Baseline {
    #[default]
    Zero,
    ChannelMean,
}

impl Baseline {
    pub(crate) fn values(self, x: &TimeSeries) -> Vec<f64> {
        (0..x.channels())
            .map(|ch| match self {
                Baseline::Zero => 0.0,
                Baseline::ChannelMean => x.channel_mean(ch),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OcclusionConfig {
    pub window: usize,
    /// Defaults to `window`.
    pub stride: Option<usize>,
    pub baseline: Baseline,
    /// Defaults to the class predicted for the unmodified input.
    pub target: Option<usize>,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        Self {
            window: 1,
            stride: None,
            baseline: Baseline::Zero,
            target: None,
        }
    }
}

impl OcclusionConfig {
    pub fn with_window(window: usize) -> Self {
        Self {
            window,
            ..Self::default()
        }
    }

    pub fn with_target(&self, target: usize) -> Self {
        Self {
            target: Some(target),
            ..self.clone()
        }
    }

    pub fn stride(&self) -> usize {
        self.stride.unwrap_or(self.window)
    }

    fn validate(&self, units: usize) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be >= 1".into()));
        }
        if self.stride() == 0 {
            return Err(Error::InvalidConfig("stride must be >= 1".into()));
        }
        if self.window > units {
            return Err(Error::InvalidConfig(format!(
                "window {} exceeds the {units} occludable units",
                self.window
            )));
        }
        Ok(())
    }
}

/// Start offsets of the occlusion windows over `units` positions:
/// `ceil((units - window) / stride) + 1` windows, the last one aligned to
/// the end so every position is covered when `stride <= window`.
pub fn window_starts(units: usize, window: usize, stride: usize) -> Vec<usize> {
    let span = units - window;
    let count = span.div_ceil(stride) + 1;
    (0..count).map(|i| (i * stride).min(span)).collect()
}

/// Per-unit relevance scores.
///
/// `scores` is row-major with `rows` time steps (input space) or
/// independent bins (frequency space) and `channels` columns.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttributionMap {
    pub domain: Domain,
    pub method: Method,
    pub target_class: usize,
    rows: usize,
    channels: usize,
    scores: Vec<f64>,
}

impl AttributionMap {
    pub fn new(
        domain: Domain,
        method: Method,
        target_class: usize,
        rows: usize,
        channels: usize,
        scores: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || channels == 0 || scores.len() != rows * channels {
            return Err(Error::ContractViolation(format!(
                "{} scores do not fill a {rows}x{channels} map",
                scores.len()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::ContractViolation("non-finite attribution score".into()));
        }
        Ok(Self {
            domain,
            method,
            target_class,
            rows,
            channels,
            scores,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn get(&self, row: usize, channel: usize) -> f64 {
        self.scores[row * self.channels + channel]
    }

    pub fn channel(&self, channel: usize) -> Vec<f64> {
        self.scores
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    /// Row with the highest score in `channel`; earliest row wins ties.
    pub fn argmax_row(&self, channel: usize) -> usize {
        argmax(&self.channel(channel))
    }

    /// True when every score lies in `[0, 1]`.
    pub fn is_normalized(&self) -> bool {
        self.scores.iter().all(|s| (0.0..=1.0).contains(s))
    }

    /// Checks that the map can explain `x` in its domain.
    pub fn check_shape(&self, x: &TimeSeries) -> Result<()> {
        let rows = match self.domain {
            Domain::Input => x.length(),
            Domain::Frequency => independent_bins(x.length()),
        };
        if self.rows != rows || self.channels != x.channels() {
            return Err(Error::ContractViolation(format!(
                "{} map is {}x{}, signal needs {rows}x{}",
                self.domain.as_str(),
                self.rows,
                self.channels,
                x.channels()
            )));
        }
        Ok(())
    }
}

/// Target class and its reference probability: one forward pass.
fn reference(oracle: &ClassifierOracle, x: &TimeSeries, cfg: &OcclusionConfig) -> Result<(usize, f64)> {
    let probs = oracle.predict(x)?;
    let target = cfg.target.unwrap_or_else(|| argmax(&probs));
    if target >= probs.len() {
        return Err(Error::InvalidConfig(format!(
            "target class {target} out of range for {} classes",
            probs.len()
        )));
    }
    Ok((target, probs[target]))
}

/// Averages per-window drops onto the units each window covers.
struct WindowAccumulator {
    sums: Vec<f64>,
    counts: Vec<u32>,
}

impl WindowAccumulator {
    fn new(units: usize) -> Self {
        Self {
            sums: vec![0.0; units],
            counts: vec![0; units],
        }
    }

    fn add(&mut self, start: usize, window: usize, drop: f64) {
        for u in start..start + window {
            self.sums[u] += drop;
            self.counts[u] += 1;
        }
    }

    fn means(self) -> impl Iterator<Item = f64> {
        self.sums
            .into_iter()
            .zip(self.counts)
            .map(|(s, c)| if c == 0 { 0.0 } else { s / f64::from(c) })
    }
}

/// Traditional occlusion: slide a window over each channel, fill it with
/// the baseline and record the drop of the target probability.
pub fn occlusion_attribution(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    cfg: &OcclusionConfig,
) -> Result<AttributionMap> {
    oracle.check_dims(x)?;
    let t = x.length();
    let s = x.channels();
    cfg.validate(t)?;
    let (target, ref_score) = reference(oracle, x, cfg)?;
    let baseline = cfg.baseline.values(x);
    let starts = window_starts(t, cfg.window, cfg.stride());

    let mut scores = vec![0.0; t * s];
    for ch in 0..s {
        let mut acc = WindowAccumulator::new(t);
        for &start in &starts {
            let mut occluded = x.clone();
            let values = occluded.values_mut();
            for step in start..start + cfg.window {
                values[step * s + ch] = baseline[ch];
            }
            let score = oracle.predict(&occluded)?[target];
            acc.add(start, cfg.window, ref_score - score);
        }
        for (step, v) in acc.means().enumerate() {
            scores[step * s + ch] = v;
        }
    }
    AttributionMap::new(Domain::Input, Method::Occlusion, target, t, s, scores)
}

/// Frequency occlusion: slide a window over the independent DFT bins of
/// each channel, zero them (with mirrors), transform back and record the
/// drop of the target probability.
pub fn frequency_attribution(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    cfg: &OcclusionConfig,
) -> Result<AttributionMap> {
    oracle.check_dims(x)?;
    let t = x.length();
    let s = x.channels();
    let f = independent_bins(t);
    cfg.validate(f)?;
    let (target, ref_score) = reference(oracle, x, cfg)?;
    let spectra = channelwise_fft(x);
    let starts = window_starts(f, cfg.window, cfg.stride());

    let mut scores = vec![0.0; f * s];
    for (ch, spectrum) in spectra.iter().enumerate() {
        let signal = x.channel(ch);
        let mut acc = WindowAccumulator::new(f);
        let mut gains = vec![1.0; f];
        for &start in &starts {
            gains[start..start + cfg.window].fill(0.0);
            let filtered = apply_bin_gains(&signal, spectrum, &gains)?;
            gains[start..start + cfg.window].fill(1.0);
            let score = oracle.predict(&x.with_channel(ch, &filtered))?[target];
            acc.add(start, cfg.window, ref_score - score);
        }
        for (bin, v) in acc.means().enumerate() {
            scores[bin * s + ch] = v;
        }
    }
    AttributionMap::new(Domain::Frequency, Method::Frequency, target, f, s, scores)
}

/// Per-channel min-max rescaling into `[0, 1]`; constant channels become
/// all ones.
pub fn normalize(map: &AttributionMap) -> AttributionMap {
    let mut out = map.clone();
    for ch in 0..map.channels {
        let column = map.channel(ch);
        let min = column.iter().copied().fold(f64::INFINITY, f64::min);
        let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = max - min;
        for (row, v) in column.into_iter().enumerate() {
            out.scores[row * map.channels + ch] = if range > 0.0 { (v - min) / range } else { 1.0 };
        }
    }
    out
}

fn expect_domain(map: &AttributionMap, domain: Domain) -> Result<()> {
    if map.domain != domain {
        return Err(Error::DomainMismatch {
            expected: domain.as_str(),
            found: map.domain.as_str(),
        });
    }
    Ok(())
}

/// Reconstructs every channel after scaling its bins by `gains(channel)`.
fn filter_channels(
    x: &TimeSeries,
    spectra: &[Spectrum],
    mut gains: impl FnMut(usize) -> Vec<f64>,
) -> Result<TimeSeries> {
    let mut out = x.clone();
    for (ch, spectrum) in spectra.iter().enumerate() {
        let filtered = apply_bin_gains(&x.channel(ch), spectrum, &gains(ch))?;
        out.set_channel(ch, &filtered);
    }
    Ok(out)
}

/// Back-projects a normalized frequency map into the input space:
/// `|x - IDFT(DFT(x) * a)|` per channel.
pub fn project_to_input_space(x: &TimeSeries, a_freq: &AttributionMap) -> Result<AttributionMap> {
    expect_domain(a_freq, Domain::Frequency)?;
    a_freq.check_shape(x)?;
    if !a_freq.is_normalized() {
        return Err(Error::ContractViolation(
            "frequency map must be normalized to [0, 1] before projection".into(),
        ));
    }
    let spectra = channelwise_fft(x);
    let filtered = filter_channels(x, &spectra, |ch| a_freq.channel(ch))?;
    let scores = x
        .values()
        .iter()
        .zip(filtered.values())
        .map(|(a, b)| libm::fabs(a - b))
        .collect();
    AttributionMap::new(
        Domain::Input,
        a_freq.method,
        a_freq.target_class,
        x.length(),
        x.channels(),
        scores,
    )
}

/// How frequency relevance is turned into per-bin gains.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MaskPolicy {
    /// Gain equals the normalized relevance.
    Soft,
    /// Keep the `k` most relevant bins per channel, drop the rest.
    TopK(usize),
    /// Keep bins whose normalized relevance is strictly above `theta`.
    Threshold(f64),
}

impl MaskPolicy {
    pub fn validate(&self, independent_bins: usize) -> Result<()> {
        match *self {
            MaskPolicy::Soft => Ok(()),
            MaskPolicy::TopK(k) if k > independent_bins => Err(Error::InvalidPolicy(format!(
                "top-{k} exceeds the {independent_bins} independent bins"
            ))),
            MaskPolicy::Threshold(theta) if !(0.0..=1.0).contains(&theta) => Err(
                Error::InvalidPolicy(format!("threshold {theta} outside [0, 1]")),
            ),
            _ => Ok(()),
        }
    }

    /// Gains for one channel of relevance scores.
    pub fn gains(&self, relevance: &[f64]) -> Vec<f64> {
        let min = relevance.iter().copied().fold(f64::INFINITY, f64::min);
        let max = relevance.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = max - min;
        let normalized: Vec<f64> = relevance
            .iter()
            .map(|v| if range > 0.0 { (v - min) / range } else { 1.0 })
            .collect();
        match *self {
            MaskPolicy::Soft => normalized,
            MaskPolicy::Threshold(theta) => normalized
                .iter()
                .map(|&v| if v > theta { 1.0 } else { 0.0 })
                .collect(),
            MaskPolicy::TopK(k) => {
                let mut order: Vec<usize> = (0..relevance.len()).collect();
                order.sort_by(|&a, &b| relevance[b].total_cmp(&relevance[a]).then(a.cmp(&b)));
                let mut gains = vec![0.0; relevance.len()];
                for &bin in order.iter().take(k) {
                    gains[bin] = 1.0;
                }
                gains
            }
        }
    }
}

/// The filtered input `IDFT(DFT(x) * mask(a_freq))`.
pub fn optimize_signal(x: &TimeSeries, a_freq: &AttributionMap, mask: MaskPolicy) -> Result<TimeSeries> {
    expect_domain(a_freq, Domain::Frequency)?;
    a_freq.check_shape(x)?;
    mask.validate(independent_bins(x.length()))?;
    let spectra = channelwise_fft(x);
    filter_channels(x, &spectra, |ch| mask.gains(&a_freq.channel(ch)))
}

/// Frequency attribution to filter the input, then traditional occlusion
/// on the filtered signal, tracking the same target class.
pub fn combined_attribution(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    cfg: &OcclusionConfig,
    mask: MaskPolicy,
) -> Result<AttributionMap> {
    let (map, _) = combined_attribution_with_signal(oracle, x, cfg, mask)?;
    Ok(map)
}

/// Like [`combined_attribution`], also returning the filtered signal the
/// occlusion ran on.
pub fn combined_attribution_with_signal(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    cfg: &OcclusionConfig,
    mask: MaskPolicy,
) -> Result<(AttributionMap, TimeSeries)> {
    mask.validate(independent_bins(x.length()))?;
    let a_freq = frequency_attribution(oracle, x, cfg)?;
    let optimized = optimize_signal(x, &a_freq, mask)?;
    let mut map = occlusion_attribution(oracle, &optimized, &cfg.with_target(a_freq.target_class))?;
    map.method = Method::Combined;
    Ok((map, optimized))
}

/// Uniform scores in `[0, 1)` drawn from a ChaCha8 stream seeded with
/// `seed`, filled in row-major order.
pub fn random_attribution(x: &TimeSeries, seed: u64, domain: Domain) -> AttributionMap {
    let rows = match domain {
        Domain::Input => x.length(),
        Domain::Frequency => independent_bins(x.length()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scores = (0..rows * x.channels()).map(|_| rng.random::<f64>()).collect();
    AttributionMap {
        domain,
        method: Method::Random,
        target_class: 0,
        rows,
        channels: x.channels(),
        scores,
    }
}
