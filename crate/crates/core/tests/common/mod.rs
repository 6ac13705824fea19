//! Reference implementations shared by the integration tests. Nothing here
//! goes through the crate's FFT.

#![allow(dead_code)]

use std::f64::consts::PI;

use freqatt_core::{make_bandpower_oracle, BandRule, ClassifierOracle, TimeSeries};

/// `cos(2 pi bin n / t + phase)` scaled by `amplitude`.
pub fn tone(t: usize, bin: usize, amplitude: f64, phase: f64) -> Vec<f64> {
    (0..t)
        .map(|n| amplitude * (2.0 * PI * ((bin * n) % t) as f64 / t as f64 + phase).cos())
        .collect()
}

/// Direct `O(t^2)` DFT returning `(re, im)` pairs.
pub fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let t = x.len();
    (0..t)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (n, v)| {
                let angle = -2.0 * PI * ((k * n) % t) as f64 / t as f64;
                (re + v * angle.cos(), im + v * angle.sin())
            })
        })
        .collect()
}

/// Squared-amplitude energy of bins `lo..=hi`, straight from the DFT sum.
pub fn naive_band_energy(x: &[f64], lo: usize, hi: usize) -> f64 {
    let t = x.len();
    let spectrum = naive_dft(x);
    (lo..=hi)
        .map(|k| {
            let weight = if k == 0 || 2 * k == t { 1.0 } else { 2.0 };
            let (re, im) = spectrum[k];
            let amp = weight * (re * re + im * im).sqrt() / t as f64;
            amp * amp
        })
        .sum()
}

/// The part of `x` made of bins `lo..=hi` (and their mirrors), by least
/// squares projection on the matching cosines and sines.
pub fn band_component(x: &[f64], lo: usize, hi: usize) -> Vec<f64> {
    let t = x.len();
    let mut out = vec![0.0; t];
    for k in lo..=hi {
        let c: Vec<f64> = tone(t, k, 1.0, 0.0);
        let s: Vec<f64> = tone(t, k, 1.0, -PI / 2.0);
        for basis in [c, s] {
            let norm: f64 = basis.iter().map(|b| b * b).sum();
            if norm < 1e-9 {
                continue;
            }
            let coeff: f64 = x.iter().zip(&basis).map(|(a, b)| a * b).sum::<f64>() / norm;
            for (o, b) in out.iter_mut().zip(&basis) {
                *o += coeff * b;
            }
        }
    }
    out
}

pub fn single_rule_oracle(t: usize, bin: usize, threshold: f64) -> ClassifierOracle {
    let rule = BandRule {
        class: 1,
        channel: 0,
        bin_low: bin,
        bin_high: bin,
        threshold,
    };
    make_bandpower_oracle(vec![rule], 2, t, 1, 4.0).unwrap()
}

pub fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries::univariate(values).unwrap()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.iter().map(|e| e / total).collect()
}
