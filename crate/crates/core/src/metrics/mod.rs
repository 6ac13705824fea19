//! Evaluation metrics for attribution maps.

mod deletion;
mod evaluate;
mod ranking;
mod robustness;
mod similarity;

pub use deletion::{auc, deletion_curve, DeletionCurve, DeletionSpace, DeletionSteps};
pub use evaluate::{
    attribute, evaluate_map, evaluate_sample, input_space_map, sample_seed, EvalSettings, SampleEvaluation,
};
pub use ranking::{average_rank_table, rank_with_ties, RankTable};
pub use robustness::{
    continuity, infidelity, infidelity_with_mode, sensitivity,
};
pub use similarity::{
    aggregate_similarity, class_similarity_matrix, cosine_similarity, cross_correlation,
    l2_distance, ClassSimilarity, SimilarityMatrix,
};

use crate::attribution::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MetricKind {
    Auc,
    Infidelity,
    Sensitivity,
    Continuity,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Auc,
        MetricKind::Infidelity,
        MetricKind::Sensitivity,
        MetricKind::Continuity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Auc => "auc",
            MetricKind::Infidelity => "infidelity",
            MetricKind::Sensitivity => "sensitivity",
            MetricKind::Continuity => "continuity",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == name)
    }

    /// All four metrics rank lower values as better.
    pub fn lower_is_better(self) -> bool {
        true
    }
}

/// Settings that, together with the oracle and the sample, reproduce a
/// [`MetricReport`] exactly.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricConfig {
    /// Infidelity noise scale relative to each channel's standard deviation.
    pub sigma: f64,
    pub n_perturb: usize,
    /// Sensitivity L-infinity radius.
    pub radius: f64,
    pub steps: DeletionSteps,
    pub space: DeletionSpace,
    pub seed: u64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            n_perturb: 16,
            radius: 0.05,
            steps: DeletionSteps::Even(50),
            space: DeletionSpace::Input,
            seed: 0,
        }
    }
}

/// Metric values for one (sample, method) pair. Metrics that were not
/// requested are `None`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricReport {
    pub sample_id: usize,
    pub method: Method,
    pub auc: Option<f64>,
    pub infidelity: Option<f64>,
    pub sensitivity: Option<f64>,
    pub continuity: Option<f64>,
    pub config: MetricConfig,
}

impl MetricReport {
    pub fn get(&self, metric: MetricKind) -> Option<f64> {
        match metric {
            MetricKind::Auc => self.auc,
            MetricKind::Infidelity => self.infidelity,
            MetricKind::Sensitivity => self.sensitivity,
            MetricKind::Continuity => self.continuity,
        }
    }
}
