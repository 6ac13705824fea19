//! Infidelity, sensitivity and continuity.
//!
//! Perturbations are drawn from a ChaCha8 stream seeded with the caller's
//! seed, one value per `(step, channel)` in step-major order, one full
//! perturbation after the other. The first `n` draws of a run with `2n`
//! draws are therefore the draws of the run with `n`.

use alloc::vec::Vec;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::attribution::{AttributionMap, Domain};
use crate::error::{Error, Result};
use crate::models::{ClassifierOracle, ScoreMode};
use crate::signal::TimeSeries;

fn expect_input_map(map: &AttributionMap) -> Result<()> {
    if map.domain != Domain::Input {
        return Err(Error::DomainMismatch {
            expected: Domain::Input.as_str(),
            found: map.domain.as_str(),
        });
    }
    Ok(())
}

/// Infidelity with the score mode picked by [`ScoreMode::auto`].
pub fn infidelity(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    map: &AttributionMap,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Result<f64> {
    infidelity_with_mode(oracle, x, map, sigma, n, seed, ScoreMode::auto(oracle))
}

/// Monte Carlo estimate of `E[(I . a - (f(x) - f(x - I)))^2]`.
///
/// `I` is Gaussian noise whose standard deviation on channel `c` is
/// `sigma * std(x_c)` (or `sigma` for a constant channel) and `f` is the
/// target-class score of the map in `mode`.
pub fn infidelity_with_mode(
    oracle: &ClassifierOracle,
    x: &TimeSeries,
    map: &AttributionMap,
    sigma: f64,
    n: usize,
    seed: u64,
    mode: ScoreMode,
) -> Result<f64> {
    expect_input_map(map)?;
    map.check_shape(x)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidConfig("infidelity sigma must be > 0".into()));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("infidelity needs n >= 1".into()));
    }
    let channels = x.channels();
    let scale: Vec<f64> = (0..channels)
        .map(|ch| {
            let std = x.channel_std(ch);
            if std > 0.0 {
                sigma * std
            } else {
                sigma
            }
        })
        .collect();

    let target = map.target_class;
    let reference = oracle.target_score(x, target, mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..n {
        let noise: Vec<f64> = (0..x.values().len())
            .map(|i| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale[i % channels]
            })
            .collect();
        let perturbed: Vec<f64> = x.values().iter().zip(&noise).map(|(v, e)| v - e).collect();
        let perturbed = TimeSeries::new(x.length(), channels, perturbed)?;
        let predicted: f64 = noise.iter().zip(map.scores()).map(|(e, a)| e * a).sum();
        let actual = reference - oracle.target_score(&perturbed, target, mode)?;
        let gap = predicted - actual;
        total += gap * gap;
    }
    Ok(total / n as f64)
}

fn l2(values: impl Iterator<Item = f64>) -> f64 {
    libm::sqrt(values.map(|v| v * v).sum())
}

/// Max-sensitivity: the largest relative L2 change of the attribution over
/// `n` perturbations drawn uniformly from the L-infinity ball of `radius`.
/// Falls back to the absolute change when `|a(x)|` is below `1e-12`.
pub fn sensitivity<F>(mut attribution_fn: F, x: &TimeSeries, radius: f64, n: usize, seed: u64) -> Result<f64>
where
    F: FnMut(&TimeSeries) -> Result<AttributionMap>,
{
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidConfig("sensitivity radius must be > 0".into()));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("sensitivity needs n >= 1".into()));
    }
    let base = attribution_fn(x)?;
    let base_norm = l2(base.scores().iter().copied());
    let uniform = Uniform::new_inclusive(-radius, radius)
        .map_err(|_| Error::InvalidConfig("invalid sensitivity radius".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let perturbed: Vec<f64> = x.values().iter().map(|v| v + uniform.sample(&mut rng)).collect();
        let perturbed = TimeSeries::new(x.length(), x.channels(), perturbed)?;
        let map = attribution_fn(&perturbed)?;
        if map.scores().len() != base.scores().len() {
            return Err(Error::ContractViolation("attribution shape changed under perturbation".into()));
        }
        let change = l2(map.scores().iter().zip(base.scores()).map(|(a, b)| a - b));
        let ratio = if base_norm < 1e-12 { change } else { change / base_norm };
        worst = worst.max(ratio);
    }
    Ok(worst)
}

/// Total variation over time, summed over channels.
pub fn continuity(map: &AttributionMap) -> Result<f64> {
    expect_input_map(map)?;
    let channels = map.channels();
    Ok(map
        .scores()
        .windows(channels + 1)
        .map(|w| libm::fabs(w[channels] - w[0]))
        .sum())
}
