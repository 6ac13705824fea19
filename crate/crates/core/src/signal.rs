//! Time-series container and the real-signal Fourier transforms built on
//! top of the complex kernels.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// Imaginary residue above which an inverse transform is rejected as
/// coming from a non-symmetric spectrum.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// A real-valued multichannel signal stored step-major: the value for
/// `(step, channel)` lives at `step * channels + channel`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    length: usize,
    channels: usize,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(length: usize, channels: usize, values: Vec<f64>) -> Result<Self> {
        if length == 0 || channels == 0 {
            return Err(Error::InvalidInput(format!(
                "time series needs at least one step and one channel, got {length}x{channels}"
            )));
        }
        if values.len() != length * channels {
            return Err(Error::InvalidInput(format!(
                "expected {} values for {length}x{channels}, got {}",
                length * channels,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at step {} channel {}",
                pos / channels,
                pos % channels
            )));
        }
        Ok(Self {
            length,
            channels,
            values,
        })
    }

    /// Single-channel series.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::new(values.len(), 1, values)
    }

    /// Builds a series from per-channel vectors of equal length.
    pub fn from_channels(channels: &[Vec<f64>]) -> Result<Self> {
        let length = channels.first().map_or(0, Vec::len);
        if channels.iter().any(|c| c.len() != length) {
            return Err(Error::InvalidInput("channels differ in length".into()));
        }
        let mut values = Vec::with_capacity(length * channels.len());
        for step in 0..length {
            values.extend(channels.iter().map(|c| c[step]));
        }
        Self::new(length, channels.len(), values)
    }

    pub fn zeros(length: usize, channels: usize) -> Result<Self> {
        Self::new(length, channels, alloc::vec![0.0; length * channels])
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, step: usize, channel: usize) -> f64 {
        self.values[step * self.channels + channel]
    }

    pub fn channel(&self, channel: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    pub fn channel_mean(&self, channel: usize) -> f64 {
        self.values
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .sum::<f64>()
            / self.length as f64
    }

    /// Population standard deviation of one channel.
    pub fn channel_std(&self, channel: usize) -> f64 {
        let mean = self.channel_mean(channel);
        let var = self
            .values
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / self.length as f64;
        libm::sqrt(var)
    }

    /// Copy of `self` with one channel replaced. `data` must be finite and
    /// `length` long.
    pub(crate) fn with_channel(&self, channel: usize, data: &[f64]) -> Self {
        let mut out = self.clone();
        out.set_channel(channel, data);
        out
    }

    pub(crate) fn set_channel(&mut self, channel: usize, data: &[f64]) {
        debug_assert_eq!(data.len(), self.length);
        for (step, v) in data.iter().enumerate() {
            self.values[step * self.channels + channel] = *v;
        }
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Per-channel z-normalization. Constant channels are centred only.
    pub fn z_normalized(&self) -> Self {
        let mut out = self.clone();
        for ch in 0..self.channels {
            let mean = self.channel_mean(ch);
            let std = self.channel_std(ch);
            let scale = if std > 0.0 { 1.0 / std } else { 1.0 };
            for step in 0..self.length {
                out.values[step * self.channels + ch] = (self.get(step, ch) - mean) * scale;
            }
        }
        out
    }
}

/// Full-length DFT of one real channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bins: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_bins(bins: Vec<Complex64>) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::InvalidInput("spectrum needs at least one bin".into()));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn origin_length(&self) -> usize {
        self.bins.len()
    }

    /// Number of independent bins of a real signal of this length.
    pub fn independent_bins(&self) -> usize {
        independent_bins(self.bins.len())
    }

    /// Largest `|X[k] - conj(X[t-k])|` over all bins.
    pub fn symmetry_error(&self) -> f64 {
        let t = self.bins.len();
        (1..t)
            .map(|k| (self.bins[k] - self.bins[t - k].conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// `floor(t/2) + 1`: the bins of a real length-`t` signal that are not
/// conjugate mirrors of each other.
pub fn independent_bins(length: usize) -> usize {
    length / 2 + 1
}

/// Mirror partner of bin `k`. DC and (for even `t`) Nyquist are their own
/// mirrors.
pub fn mirror_bin(k: usize, length: usize) -> usize {
    if k == 0 {
        0
    } else {
        length - k
    }
}

pub fn dft_forward(signal: &[f64]) -> Result<Spectrum> {
    if signal.is_empty() {
        return Err(Error::InvalidInput("cannot transform an empty signal".into()));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("signal contains non-finite values".into()));
    }
    let mut bins: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut bins);
    Ok(Spectrum { bins })
}

/// Inverse DFT with `1/t` scaling. Fails if the result would carry an
/// imaginary part of `SYMMETRY_TOLERANCE` or more.
pub fn dft_inverse(spectrum: &Spectrum) -> Result<Vec<f64>> {
    let mut buf = spectrum.bins.clone();
    fft::inverse(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    let residue = buf.iter().map(|c| libm::fabs(c.im * scale)).fold(0.0, f64::max);
    if !(residue < SYMMETRY_TOLERANCE) {
        return Err(Error::SymmetryViolation { residue });
    }
    Ok(buf.iter().map(|c| c.re * scale).collect())
}

pub fn channelwise_fft(x: &TimeSeries) -> Vec<Spectrum> {
    (0..x.channels())
        .map(|ch| {
            let mut bins: Vec<Complex64> = x
                .channel(ch)
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect();
            fft::forward(&mut bins);
            Spectrum { bins }
        })
        .collect()
}

/// Rescales each independent bin `k` (and its mirror) of `signal` by
/// `gains[k]` and returns the real inverse.
///
/// Computed as `signal - IDFT(X * (1 - gain))` so bins with gain exactly 1
/// contribute nothing; an all-pass gain vector returns `signal` bit for bit.
pub(crate) fn apply_bin_gains(signal: &[f64], spectrum: &Spectrum, gains: &[f64]) -> Result<Vec<f64>> {
    let t = signal.len();
    debug_assert_eq!(spectrum.origin_length(), t);
    debug_assert_eq!(gains.len(), independent_bins(t));

    if gains.iter().all(|&g| g == 1.0) {
        return Ok(signal.to_vec());
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut removed = alloc::vec![zero; t];
    for (k, &g) in gains.iter().enumerate() {
        let keep_out = 1.0 - g;
        if keep_out == 0.0 {
            continue;
        }
        removed[k] = spectrum.bins[k] * keep_out;
        let m = mirror_bin(k, t);
        removed[m] = spectrum.bins[m] * keep_out;
    }
    let removed = dft_inverse(&Spectrum { bins: removed })?;
    Ok(signal.iter().zip(&removed).map(|(x, r)| x - r).collect())
}
