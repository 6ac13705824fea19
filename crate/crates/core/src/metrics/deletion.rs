use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::attribution::{AttributionMap, Baseline, Domain};
use crate::error::{Error, Result};
use crate::models::ClassifierOracle;
use crate::signal::{apply_bin_gains, channelwise_fft, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DeletionSpace {
    /// Delete time steps by filling them with the baseline.
    Input,
    /// Delete whole independent bins (with mirrors) and transform back.
    Frequency,
}

impl DeletionSpace {
    pub fn domain(self) -> Domain {
        match self {
            DeletionSpace::Input => Domain::Input,
            DeletionSpace::Frequency => Domain::Frequency,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DeletionSpace::Input => "input",
            DeletionSpace::Frequency => "frequency",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum DeletionSteps {
    /// `n >= 2` evenly spaced fractions from 0 to 1.
    Even(usize),
    /// One curve point per deleted unit.
    PerUnit,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeletionCurve {
    pub fractions: Vec<f64>,
    pub scores: Vec<f64>,
    pub space: DeletionSpace,
}

/// Removes units in descending relevance order and tracks the probability
/// of the map's target class. Ties go to the lower unit index, where unit
/// `row * channels + channel` is one step (or bin) of one channel.
pub fn deletion_curve(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    map: &AttributionMap,
    space: DeletionSpace,
    steps: DeletionSteps,
    baseline: Baseline,
) -> Result<DeletionCurve> {
    if map.domain != space.domain() {
        return Err(Error::DomainMismatch {
            expected: space.domain().as_str(),
            found: map.domain.as_str(),
        });
    }
    oracle.check_dims(x)?;
    map.check_shape(x)?;
    let target = map.target_class;
    if target >= oracle.num_classes() {
        return Err(Error::InvalidConfig(format!("target class {target} out of range")));
    }

    let scores = map.scores();
    let units = scores.len();
    let mut order: Vec<usize> = (0..units).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let (fractions, counts): (Vec<f64>, Vec<usize>) = match steps {
        DeletionSteps::Even(n) => {
            if n < 2 {
                return Err(Error::InvalidConfig(format!("deletion needs >= 2 steps, got {n}")));
            }
            let last = n - 1;
            (0..n)
                .map(|j| (j as f64 / last as f64, (j * units + last / 2) / last))
                .unzip()
        }
        DeletionSteps::PerUnit => (0..=units).map(|j| (j as f64 / units as f64, j)).unzip(),
    };

    let channels = x.channels();
    let fill = baseline.values(x);
    let spectra = match space {
        DeletionSpace::Frequency => channelwise_fft(x),
        DeletionSpace::Input => Vec::new(),
    };
    let channel_signals: Vec<Vec<f64>> = match space {
        DeletionSpace::Frequency => (0..channels).map(|ch| x.channel(ch)).collect(),
        DeletionSpace::Input => Vec::new(),
    };

    let mut curve_scores = Vec::with_capacity(counts.len());
    for &count in &counts {
        let deleted = &order[..count];
        let probe = match space {
            DeletionSpace::Input => {
                let mut probe = x.clone();
                let values = probe.values_mut();
                for &unit in deleted {
                    values[unit] = fill[unit % channels];
                }
                probe
            }
            DeletionSpace::Frequency => {
                let mut gains = vec![vec![1.0; map.rows()]; channels];
                for &unit in deleted {
                    gains[unit % channels][unit / channels] = 0.0;
                }
                let mut probe = x.clone();
                for ch in 0..channels {
                    let filtered = apply_bin_gains(&channel_signals[ch], &spectra[ch], &gains[ch])?;
                    probe.set_channel(ch, &filtered);
                }
                probe
            }
        };
        curve_scores.push(oracle.predict(&probe)?[target]);
    }

    Ok(DeletionCurve {
        fractions,
        scores: curve_scores,
        space,
    })
}

/// Trapezoidal area under the score-vs-fraction curve.
pub fn auc(curve: &DeletionCurve) -> f64 {
    curve
        .fractions
        .windows(2)
        .zip(curve.scores.windows(2))
        .map(|(f, s)| (f[1] - f[0]) * (s[0] + s[1]) * 0.5)
        .sum()
}
