//! How far a sample moves when it is filtered toward each class.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::attribution::{frequency_attribution, optimize_signal, MaskPolicy, OcclusionConfig};
use crate::error::{Error, Result};
use crate::models::ClassifierOracle;
use crate::signal::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassSimilarity {
    pub class: usize,
    pub l2: f64,
    pub cosine: f64,
    pub cross_correlation: f64,
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(a.iter().map(|v| v * v).sum())
}

/// Cosine of the angle between two flattened signals; 0 if either is zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / denom
}

/// Maximum normalized circular cross-correlation over all lags, computed
/// per channel and averaged. Channels where either side is all zero count
/// as 0.
pub fn cross_correlation(a: &TimeSeries, b: &TimeSeries) -> f64 {
    let t = a.length();
    let channels = a.channels();
    let mut total = 0.0;
    for ch in 0..channels {
        let x = a.channel(ch);
        let y = b.channel(ch);
        let denom = norm(&x) * norm(&y);
        if denom == 0.0 {
            continue;
        }
        let best = (0..t)
            .map(|lag| (0..t).map(|n| x[n] * y[(n + lag) % t]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        total += best / denom;
    }
    total / channels as f64
}

/// For every class `k`: frequency attribution targeting `k`, filter `x`
/// toward `k` with `mask`, and compare the result with `x`.
pub fn class_similarity_matrix(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    cfg: &OcclusionConfig,
    mask: MaskPolicy,
) -> Result<Vec<ClassSimilarity>> {
    (0..oracle.num_classes())
        .map(|class| {
            let a_freq = frequency_attribution(oracle, x, &cfg.with_target(class))?;
            let optimized = optimize_signal(x, &a_freq, mask)?;
            Ok(ClassSimilarity {
                class,
                l2: l2_distance(x.values(), optimized.values()),
                cosine: cosine_similarity(x.values(), optimized.values()),
                cross_correlation: cross_correlation(x, &optimized),
            })
        })
        .collect()
}

/// Class-by-class means: row = ground-truth class, column = class the
/// sample was filtered toward.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimilarityMatrix {
    pub classes: usize,
    pub l2: Vec<f64>,
    pub cosine: Vec<f64>,
    pub cross_correlation: Vec<f64>,
    /// Samples per ground-truth class.
    pub counts: Vec<usize>,
}

impl SimilarityMatrix {
    pub fn l2_at(&self, truth: usize, toward: usize) -> f64 {
        self.l2[truth * self.classes + toward]
    }

    pub fn cosine_at(&self, truth: usize, toward: usize) -> f64 {
        self.cosine[truth * self.classes + toward]
    }

    pub fn cross_correlation_at(&self, truth: usize, toward: usize) -> f64 {
        self.cross_correlation[truth * self.classes + toward]
    }
}

/// Averages per-sample rows into a [`SimilarityMatrix`]. Rows of classes
/// without samples stay zero.
pub fn aggregate_similarity(rows: &[(usize, Vec<ClassSimilarity>)], classes: usize) -> Result<SimilarityMatrix> {
    let mut l2 = vec![0.0; classes * classes];
    let mut cosine = vec![0.0; classes * classes];
    let mut xcorr = vec![0.0; classes * classes];
    let mut counts = vec![0usize; classes];
    for (truth, row) in rows {
        if *truth >= classes || row.len() != classes {
            return Err(Error::IncompleteGrid(format!(
                "similarity row for class {truth} has {} of {classes} entries",
                row.len()
            )));
        }
        counts[*truth] += 1;
        for entry in row {
            let idx = truth * classes + entry.class;
            l2[idx] += entry.l2;
            cosine[idx] += entry.cosine;
            xcorr[idx] += entry.cross_correlation;
        }
    }
    for (truth, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        for toward in 0..classes {
            let idx = truth * classes + toward;
            l2[idx] /= count as f64;
            cosine[idx] /= count as f64;
            xcorr[idx] /= count as f64;
        }
    }
    Ok(SimilarityMatrix {
        classes,
        l2,
        cosine,
        cross_correlation: xcorr,
        counts,
    })
}
