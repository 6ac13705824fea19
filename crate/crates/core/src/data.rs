//! Labelled collections of time series, stratified subsampling and the
//! synthetic band-limited datasets used as ground truth.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::models::{BandRule, ModelParams, ModelSpec, DEFAULT_BANDPOWER_GAIN};
use crate::signal::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Split {
    Train,
    Val,
    #[default]
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub split: Split,
    samples: Vec<TimeSeries>,
    labels: Vec<usize>,
    /// Stable ids of the samples, usually their row in the source file.
    ids: Vec<usize>,
    /// Original label text of each contiguous class id.
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        split: Split,
        samples: Vec<TimeSeries>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let ids = (0..samples.len()).collect();
        Self::with_ids(name, split, samples, labels, ids, class_names)
    }

    pub fn with_ids(
        name: impl Into<String>,
        split: Split,
        samples: Vec<TimeSeries>,
        labels: Vec<usize>,
        ids: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidDataset("dataset has no samples".into()))?;
        let (t, s) = (first.length(), first.channels());
        if let Some(i) = samples.iter().position(|x| x.length() != t || x.channels() != s) {
            return Err(Error::InvalidDataset(format!(
                "sample {i} is {}x{}, expected {t}x{s}",
                samples[i].length(),
                samples[i].channels()
            )));
        }
        if labels.len() != samples.len() || ids.len() != samples.len() {
            return Err(Error::InvalidDataset(format!(
                "{} samples, {} labels, {} ids",
                samples.len(),
                labels.len(),
                ids.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} outside {} classes",
                class_names.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            split,
            samples,
            labels,
            ids,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn length(&self) -> usize {
        self.samples[0].length()
    }

    pub fn channels(&self) -> usize {
        self.samples[0].channels()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn samples(&self) -> &[TimeSeries] {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Samples at `indices` (positions in this dataset), in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::with_ids(
            self.name.clone(),
            self.split,
            indices.iter().map(|&i| self.samples[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
            indices.iter().map(|&i| self.ids[i]).collect(),
            self.class_names.clone(),
        )
    }

    pub fn z_normalized(&self) -> Self {
        Self {
            samples: self.samples.iter().map(TimeSeries::z_normalized).collect(),
            ..self.clone()
        }
    }
}

/// Positions of a stratified sample of size `n`: every class receives
/// `floor` or `ceil` of its proportional share (largest remainders first,
/// lower class index on ties), members drawn without replacement. The
/// result is sorted ascending.
pub fn subsample_indices(labels: &[usize], n: usize, seed: u64) -> Result<Vec<usize>> {
    let total = labels.len();
    if n == 0 {
        return Err(Error::InvalidConfig("subsample size must be >= 1".into()));
    }
    if n > total {
        return Err(Error::SubsampleTooLarge {
            requested: n,
            available: total,
        });
    }
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &label) in labels.iter().enumerate() {
        members[label].push(i);
    }

    let mut quota: Vec<usize> = members.iter().map(|m| n * m.len() / total).collect();
    let assigned: usize = quota.iter().sum();
    let mut by_remainder: Vec<usize> = (0..classes).collect();
    by_remainder.sort_by(|&a, &b| {
        let ra = (n * members[a].len()) % total;
        let rb = (n * members[b].len()) % total;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for &class in by_remainder.iter().take(n - assigned) {
        quota[class] += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(n);
    for (pool, &take) in members.iter_mut().zip(&quota) {
        pool.shuffle(&mut rng);
        chosen.extend_from_slice(&pool[..take]);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

pub fn subsample(ds: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    ds.select(&subsample_indices(ds.labels(), n, seed)?)
}

/// Inclusive range of DFT bins whose tones make up one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Band {
    pub bin_low: usize,
    pub bin_high: usize,
}

impl Band {
    pub fn single(bin: usize) -> Self {
        Self {
            bin_low: bin,
            bin_high: bin,
        }
    }

    pub fn contains(&self, bin: usize) -> bool {
        (self.bin_low..=self.bin_high).contains(&bin)
    }

    pub fn width(&self) -> usize {
        self.bin_high - self.bin_low + 1
    }
}

#[cfg(feature = "serde")]
fn default_amplitude() -> f64 {
    1.0
}

#[cfg(feature = "serde")]
fn default_gain() -> f64 {
    DEFAULT_BANDPOWER_GAIN
}

/// Recipe for a band-limited classification dataset.
///
/// Sample `i` belongs to class `i % bands.len()`. Every channel of a sample
/// is the sum of one cosine of `amplitude` per bin of its class band, each
/// with a uniformly random phase, plus white Gaussian noise of standard
/// deviation `noise_sigma`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticSpec {
    pub length: usize,
    pub channels: usize,
    pub count: usize,
    pub noise_sigma: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_amplitude"))]
    pub amplitude: f64,
    pub bands: Vec<Band>,
    pub seed: u64,
    #[cfg_attr(feature = "serde", serde(default = "default_gain"))]
    pub gain: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            length: 128,
            channels: 1,
            count: 100,
            noise_sigma: 0.0,
            amplitude: 1.0,
            bands: vec![Band::single(3), Band::single(9)],
            seed: 0,
            gain: DEFAULT_BANDPOWER_GAIN,
        }
    }
}

impl SyntheticSpec {
    /// Standard deviation of the noise-free signal of one channel.
    pub fn signal_std(&self, class: usize) -> f64 {
        let tones = self.bands[class].width() as f64;
        self.amplitude * libm::sqrt(tones / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 4 || self.channels == 0 || self.count == 0 {
            return Err(Error::InvalidSpec(format!(
                "synthetic shape {}x{} with {} samples is too small",
                self.length, self.channels, self.count
            )));
        }
        if self.bands.len() < 2 {
            return Err(Error::InvalidSpec("synthetic data needs at least two class bands".into()));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidSpec(format!("noise sigma {} must be >= 0", self.noise_sigma)));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidSpec(format!("amplitude {} must be > 0", self.amplitude)));
        }
        for (i, band) in self.bands.iter().enumerate() {
            // Strictly between DC and Nyquist so a random phase does not
            // change a tone's energy.
            if band.bin_low == 0 || band.bin_low > band.bin_high || 2 * band.bin_high >= self.length {
                return Err(Error::InvalidSpec(format!(
                    "band {i} ({}..={}) must lie within 1..{}",
                    band.bin_low,
                    band.bin_high,
                    self.length.div_ceil(2)
                )));
            }
            for (j, other) in self.bands.iter().enumerate().skip(i + 1) {
                if band.bin_low <= other.bin_high && other.bin_low <= band.bin_high {
                    return Err(Error::InvalidSpec(format!("bands {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }

    /// Bandpower model that separates the classes: one rule per class and
    /// channel, firing at half the class band's noise-free energy.
    pub fn oracle_spec(&self) -> ModelSpec {
        let mut rules = Vec::with_capacity(self.bands.len() * self.channels);
        for (class, band) in self.bands.iter().enumerate() {
            let energy = band.width() as f64 * self.amplitude * self.amplitude;
            for channel in 0..self.channels {
                rules.push(BandRule {
                    class,
                    channel,
                    bin_low: band.bin_low,
                    bin_high: band.bin_high,
                    threshold: energy / 2.0,
                });
            }
        }
        ModelSpec {
            num_classes: self.bands.len(),
            input_length: self.length,
            input_channels: self.channels,
            params: ModelParams::Bandpower {
                rules,
                gain: self.gain,
            },
        }
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, ModelSpec)> {
    spec.validate()?;
    let (t, s) = (spec.length, spec.channels);
    let classes = spec.bands.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|_| Error::InvalidSpec("invalid noise sigma".into()))?;

    let mut samples = Vec::with_capacity(spec.count);
    let mut labels = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let class = i % classes;
        let band = spec.bands[class];
        let mut values = vec![0.0; t * s];
        for ch in 0..s {
            for bin in band.bin_low..=band.bin_high {
                let phase = rng.random::<f64>() * 2.0 * PI;
                for n in 0..t {
                    let cycle = ((bin * n) % t) as f64 / t as f64;
                    values[n * s + ch] += spec.amplitude * libm::cos(2.0 * PI * cycle + phase);
                }
            }
        }
        if spec.noise_sigma > 0.0 {
            for v in &mut values {
                *v += noise.sample(&mut rng);
            }
        }
        samples.push(TimeSeries::new(t, s, values)?);
        labels.push(class);
    }
    let class_names = (0..classes).map(|c| c.to_string()).collect();
    let dataset = Dataset::new("synthetic", Split::Test, samples, labels, class_names)?;
    Ok((dataset, spec.oracle_spec()))
}
