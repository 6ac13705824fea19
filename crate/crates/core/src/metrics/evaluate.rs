//! Per-sample evaluation: attribute with one method, then score the map.
//!
//! Frequency maps are projected into the input space (after per-channel
//! normalization) for every input-space metric. Continuity is taken on the
//! per-channel normalized map so methods with different score units are
//! comparable.

use alloc::vec::Vec;

use crate::attribution::{
    combined_attribution, frequency_attribution, normalize, occlusion_attribution,
    project_to_input_space, random_attribution, AttributionMap, Domain, MaskPolicy, Method,
    OcclusionConfig,
};
use crate::error::{Error, Result};
use crate::models::{argmax, ClassifierOracle};
use crate::signal::TimeSeries;

use super::{
    auc, continuity, deletion_curve, infidelity, sensitivity, DeletionCurve, DeletionSpace,
    MetricConfig, MetricKind, MetricReport,
};

/// Everything needed to attribute and score one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub occlusion: OcclusionConfig,
    pub mask: MaskPolicy,
    pub metrics: MetricConfig,
    pub kinds: Vec<MetricKind>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            occlusion: OcclusionConfig::default(),
            mask: MaskPolicy::Soft,
            metrics: MetricConfig::default(),
            kinds: MetricKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleEvaluation {
    pub report: MetricReport,
    /// Present when AUC was requested.
    pub curve: Option<DeletionCurve>,
    /// The map in the method's native domain.
    pub map: AttributionMap,
}

/// Seed of the random baseline for one sample, so samples get independent
/// maps under one run seed.
pub fn sample_seed(seed: u64, sample_id: usize) -> u64 {
    seed ^ (sample_id as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs `method` on `x` in its native domain. Random maps are drawn in
/// `random_domain` and target the predicted class.
pub fn attribute(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    method: Method,
    cfg: &OcclusionConfig,
    mask: MaskPolicy,
    seed: u64,
    random_domain: Domain,
) -> Result<AttributionMap> {
    match method {
        Method::Occlusion => occlusion_attribution(oracle, x, cfg),
        Method::Frequency => frequency_attribution(oracle, x, cfg),
        Method::Combined => combined_attribution(oracle, x, cfg, mask),
        Method::Random => {
            let mut map = random_attribution(x, seed, random_domain);
            map.target_class = match cfg.target {
                Some(target) => target,
                None => argmax(&oracle.predict(x)?),
            };
            Ok(map)
        }
    }
}

/// The map in the input space: frequency maps are normalized and
/// back-projected, input maps are returned unchanged.
pub fn input_space_map(x: &TimeSeries, map: &AttributionMap) -> Result<AttributionMap> {
    match map.domain {
        Domain::Input => Ok(map.clone()),
        Domain::Frequency => project_to_input_space(x, &normalize(map)),
    }
}

/// Attributes `x` with `method` and computes the requested metrics.
pub fn evaluate_sample(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    sample_id: usize,
    method: Method,
    settings: &EvalSettings,
) -> Result<SampleEvaluation> {
    let seed = sample_seed(settings.metrics.seed, sample_id);
    let random_domain = settings.metrics.space.domain();
    let map = attribute(oracle, x, method, &settings.occlusion, settings.mask, seed, random_domain)?;
    evaluate_map(oracle, x, sample_id, map, seed, settings)
}

/// Computes the requested metrics for an existing map. Sensitivity
/// recomputes the map's method on perturbed inputs; random maps were drawn
/// with `random_seed` and are redrawn with a derived seed per probe.
pub fn evaluate_map(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    sample_id: usize,
    map: AttributionMap,
    random_seed: u64,
    settings: &EvalSettings,
) -> Result<SampleEvaluation> {
    map.check_shape(x)?;
    let cfg = &settings.metrics;
    let method = map.method;
    let fixed_target = settings.occlusion.with_target(map.target_class);
    let needs_input_map = settings.kinds.iter().any(|k| *k != MetricKind::Auc)
        || cfg.space == DeletionSpace::Input;
    let input_map = if needs_input_map {
        Some(input_space_map(x, &map)?)
    } else {
        None
    };

    let mut report = MetricReport {
        sample_id,
        method,
        auc: None,
        infidelity: None,
        sensitivity: None,
        continuity: None,
        config: cfg.clone(),
    };
    let mut curve = None;
    for &kind in &settings.kinds {
        match kind {
            MetricKind::Auc => {
                let deleted = match cfg.space {
                    DeletionSpace::Input => input_map.as_ref().expect("input map computed"),
                    DeletionSpace::Frequency if map.domain == Domain::Frequency => &map,
                    DeletionSpace::Frequency => {
                        return Err(Error::DomainMismatch {
                            expected: Domain::Frequency.as_str(),
                            found: map.domain.as_str(),
                        })
                    }
                };
                let c = deletion_curve(oracle, x, deleted, cfg.space, cfg.steps, settings.occlusion.baseline)?;
                report.auc = Some(auc(&c));
                curve = Some(c);
            }
            MetricKind::Infidelity => {
                let a = input_map.as_ref().expect("input map computed");
                report.infidelity = Some(infidelity(oracle, x, a, cfg.sigma, cfg.n_perturb, cfg.seed)?);
            }
            MetricKind::Sensitivity => {
                let domain = map.domain;
                // The first call rebuilds the map itself; every probe after it
                // draws a fresh random map.
                let mut calls = 0usize;
                let explain = |probe: &TimeSeries| {
                    let seed = if calls == 0 { random_seed } else { sample_seed(random_seed, calls) };
                    calls += 1;
                    let m = attribute(oracle, probe, method, &fixed_target, settings.mask, seed, domain)?;
                    input_space_map(probe, &m)
                };
                report.sensitivity = Some(sensitivity(explain, x, cfg.radius, cfg.n_perturb, cfg.seed)?);
            }
            MetricKind::Continuity => {
                let a = input_map.as_ref().expect("input map computed");
                report.continuity = Some(continuity(&normalize(a))?);
            }
        }
    }
    Ok(SampleEvaluation { report, curve, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_bandpower_oracle, BandRule};
    use alloc::vec;
    use core::f64::consts::PI;

    fn tone(t: usize, bin: usize) -> TimeSeries {
        let values = (0..t)
            .map(|n| libm::cos(2.0 * PI * (bin * n) as f64 / t as f64 + 0.3))
            .collect();
        TimeSeries::univariate(values).unwrap()
    }

    fn oracle(t: usize) -> ClassifierOracle {
        let rule = BandRule {
            class: 1,
            channel: 0,
            bin_low: 5,
            bin_high: 5,
            threshold: 0.5,
        };
        make_bandpower_oracle(vec![rule], 2, t, 1, 4.0).unwrap()
    }

    #[test]
    fn every_method_yields_all_metrics() {
        let x = tone(32, 5);
        let o = oracle(32);
        let mut settings = EvalSettings::default();
        settings.metrics.n_perturb = 2;
        for method in Method::ALL {
            let eval = evaluate_sample(&o, &x, 3, method, &settings).unwrap();
            for kind in MetricKind::ALL {
                let v = eval.report.get(kind).unwrap();
                assert!(v.is_finite() && v >= 0.0, "{method} {kind:?} = {v}");
            }
            assert!(eval.curve.is_some());
        }
        let random = evaluate_sample(&o, &x, 3, Method::Random, &settings).unwrap();
        assert!(random.report.sensitivity.unwrap() > 0.1);
    }

    #[test]
    fn frequency_deletion_rejects_input_maps() {
        let x = tone(32, 5);
        let o = oracle(32);
        let mut settings = EvalSettings::default();
        settings.metrics.space = DeletionSpace::Frequency;
        settings.kinds = vec![MetricKind::Auc];
        assert!(evaluate_sample(&o, &x, 0, Method::Frequency, &settings).is_ok());
        assert!(evaluate_sample(&o, &x, 0, Method::Random, &settings).is_ok());
        assert!(matches!(
            evaluate_sample(&o, &x, 0, Method::Occlusion, &settings),
            Err(Error::DomainMismatch { .. })
        ));
    }

    #[test]
    fn random_maps_target_the_prediction_and_vary_by_sample() {
        let x = tone(32, 5);
        let o = oracle(32);
        let a = attribute(&o, &x, Method::Random, &OcclusionConfig::default(), MaskPolicy::Soft, sample_seed(7, 0), Domain::Input).unwrap();
        let b = attribute(&o, &x, Method::Random, &OcclusionConfig::default(), MaskPolicy::Soft, sample_seed(7, 1), Domain::Input).unwrap();
        assert_eq!(a.target_class, 1);
        assert_ne!(a.scores(), b.scores());
    }
}
