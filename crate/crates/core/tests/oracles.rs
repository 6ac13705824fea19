mod common;

use common::{band_component, naive_band_energy, naive_dft, series, single_rule_oracle, softmax, tone};
use freqatt_core::metrics::{
    deletion_curve, infidelity, infidelity_with_mode, sensitivity, DeletionSpace, DeletionSteps,
};
use freqatt_core::signal::independent_bins;
use freqatt_core::{
    channelwise_fft, combined_attribution, frequency_attribution, occlusion_attribution,
    random_attribution, AttributionMap, Baseline, Domain, MaskPolicy, Method, OcclusionConfig,
    ScoreMode, TimeSeries,
};
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const T: usize = 64;

fn noisy_tone(seed: u64, sigma: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    tone(T, 5, 1.0, 0.9)
        .into_iter()
        .map(|v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + sigma * z
        })
        .collect()
}

/// Class-1 logit of the single-rule oracle, from the direct DFT sum.
fn reference_logit(x: &[f64]) -> f64 {
    4.0 * (naive_band_energy(x, 5, 5) - 0.5)
}

#[test]
fn infidelity_matches_a_direct_estimator() {
    let x = noisy_tone(1, 0.3);
    let oracle = single_rule_oracle(T, 5, 0.5);
    let map = occlusion_attribution(&oracle, &series(x.clone()), &OcclusionConfig::default()).unwrap();
    assert_eq!(map.target_class, 1);
    let (sigma, n, seed) = (0.1, 1000, 42);

    let mean = x.iter().sum::<f64>() / T as f64;
    let std = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / T as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reference = reference_logit(&x);
    let mut total = 0.0;
    for _ in 0..n {
        let noise: Vec<f64> = (0..T)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * sigma * std
            })
            .collect();
        let perturbed: Vec<f64> = x.iter().zip(&noise).map(|(a, e)| a - e).collect();
        let predicted: f64 = noise.iter().zip(map.scores()).map(|(e, a)| e * a).sum();
        let gap = predicted - (reference - reference_logit(&perturbed));
        total += gap * gap;
    }
    let expected = total / n as f64;

    let got = infidelity(&oracle, &series(x), &map, sigma, n, seed).unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}

#[test]
fn sensitivity_matches_a_direct_loop() {
    let x = series(noisy_tone(2, 0.2));
    let oracle = single_rule_oracle(T, 5, 0.5);
    let cfg = OcclusionConfig::default();
    let (radius, n, seed) = (0.05, 16, 9);
    let explain = |probe: &TimeSeries| frequency_attribution(&oracle, probe, &cfg.with_target(1));

    let base = explain(&x).unwrap();
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|e| e * e).sum::<f64>().sqrt();
    let base_norm = norm(&mut base.scores().iter().copied());
    let uniform = Uniform::new_inclusive(-radius, radius).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut expected: f64 = 0.0;
    for _ in 0..n {
        let probe: Vec<f64> = x.values().iter().map(|v| v + uniform.sample(&mut rng)).collect();
        let map = explain(&series(probe)).unwrap();
        let change = norm(&mut map.scores().iter().zip(base.scores()).map(|(a, b)| a - b));
        expected = expected.max(change / base_norm);
    }

    let got = sensitivity(explain, &x, radius, n, seed).unwrap();
    assert!(expected > 0.0);
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}

#[test]
fn infidelity_of_weight_vector_on_linear_logits_vanishes() {
    let weights = vec![(0..12).map(|i| (i as f64 * 0.37).sin()).collect::<Vec<_>>(), vec![0.0; 12]];
    let oracle = freqatt_core::ClassifierOracle::from_spec(freqatt_core::ModelSpec {
        num_classes: 2,
        input_length: 6,
        input_channels: 2,
        params: freqatt_core::ModelParams::Linear { weights: weights.clone(), bias: vec![0.1, -0.2] },
    })
    .unwrap();
    let x = TimeSeries::new(6, 2, (0..12).map(|i| (i as f64 * 1.3).cos()).collect()).unwrap();
    let map = AttributionMap::new(Domain::Input, Method::Occlusion, 0, 6, 2, weights[0].clone()).unwrap();
    for (sigma, n) in [(0.01, 5), (1.0, 50), (7.5, 200)] {
        let v = infidelity_with_mode(&oracle, &x, &map, sigma, n, 3, ScoreMode::Logit).unwrap();
        assert!(v.abs() < 1e-12, "sigma {sigma}: {v}");
    }
    let zero = AttributionMap::new(Domain::Input, Method::Occlusion, 0, 6, 2, vec![0.0; 12]).unwrap();
    assert!(infidelity(&oracle, &x, &zero, 0.5, 20, 3).unwrap() > 0.0);
}

#[test]
fn nested_infidelity_estimates_converge() {
    let x = series(noisy_tone(3, 0.3));
    let oracle = single_rule_oracle(T, 5, 0.5);
    let map = occlusion_attribution(&oracle, &x, &OcclusionConfig::default()).unwrap();
    let estimate = |n| infidelity(&oracle, &x, &map, 0.1, n, 17).unwrap();
    let scale = estimate(4096);
    for n in [32, 128, 512, 2048] {
        let diff = (estimate(2 * n) - estimate(n)).abs();
        assert!(diff <= 6.0 * scale / (n as f64).sqrt(), "n={n}: diff {diff}, scale {scale}");
    }
}

#[test]
fn bandpower_ignores_everything_outside_its_band() {
    let oracle = single_rule_oracle(T, 5, 0.5);
    let mut x = tone(T, 5, 1.2, 0.4);
    for (bin, amp) in [(2, 0.8), (11, 0.5), (20, 1.1)] {
        for (v, d) in x.iter_mut().zip(tone(T, bin, amp, 1.0)) {
            *v += d;
        }
    }
    let score = oracle.predict(&series(x.clone())).unwrap()[1];
    let in_band = band_component(&x, 5, 5);
    let band_only = oracle.predict(&series(in_band.clone())).unwrap()[1];
    assert!((score - band_only).abs() < 1e-9);

    let residue: Vec<f64> = x.iter().zip(&in_band).map(|(a, b)| a - b).collect();
    let without_band = oracle.predict(&series(residue)).unwrap()[1];
    assert!((score - without_band).abs() > 1e-6);
    let expected = softmax(&[0.0, reference_logit(&x)])[1];
    assert!((score - expected).abs() < 1e-12);
}

#[test]
fn predictions_are_deterministic_and_counted() {
    let oracle = single_rule_oracle(T, 5, 0.5);
    let x = series(noisy_tone(4, 0.5));
    oracle.reset_forward_passes();
    let first = oracle.predict(&x).unwrap();
    for _ in 1..100 {
        let again = oracle.predict(&x).unwrap();
        assert!(first.iter().zip(&again).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
    assert_eq!(oracle.forward_pass_count(), 100);
}

#[test]
fn concurrent_predictions_are_all_counted() {
    let oracle = single_rule_oracle(T, 5, 0.5);
    let x = series(noisy_tone(5, 0.5));
    oracle.reset_forward_passes();
    std::thread::scope(|scope| {
        for _ in 0..8 {
            scope.spawn(|| {
                for _ in 0..25 {
                    oracle.predict(&x).unwrap();
                }
            });
        }
    });
    assert_eq!(oracle.forward_pass_count(), 200);
}

#[test]
fn three_channel_trajectory_shape_gives_three_spectra() {
    let (t, s) = (182, 3);
    let values: Vec<f64> = (0..t * s).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
    let x = TimeSeries::new(t, s, values).unwrap();
    let spectra = channelwise_fft(&x);
    assert_eq!(spectra.len(), 3);
    for (ch, spectrum) in spectra.iter().enumerate() {
        assert_eq!(spectrum.bins().len(), 182);
        for (got, (re, im)) in spectrum.bins().iter().zip(naive_dft(&x.channel(ch))) {
            assert!((got.re - re).abs() < 1e-9 && (got.im - im).abs() < 1e-9);
        }
    }
}

#[test]
fn combined_map_tracks_occlusion_of_the_clean_band_signal() {
    let oracle = single_rule_oracle(T, 5, 0.5);
    let cfg = OcclusionConfig::default();
    for seed in 0..5 {
        let x = noisy_tone(10 + seed, 0.4);
        let clean = band_component(&x, 5, 5);
        let reference = occlusion_attribution(&oracle, &series(clean), &cfg).unwrap();

        // Keeping only the most relevant bin reproduces the clean signal.
        let exact = combined_attribution(&oracle, &series(x.clone()), &cfg, MaskPolicy::TopK(1)).unwrap();
        for (a, b) in exact.scores().iter().zip(reference.scores()) {
            assert!((a - b).abs() < 1e-9);
        }

        let soft = combined_attribution(&oracle, &series(x), &cfg, MaskPolicy::Soft).unwrap();
        let top = |m: &AttributionMap| {
            let mut order: Vec<usize> = (0..T).collect();
            order.sort_by(|&a, &b| m.get(b, 0).total_cmp(&m.get(a, 0)));
            order.truncate(8);
            order.sort();
            order
        };
        assert_eq!(exact.argmax_row(0), reference.argmax_row(0));
        let shared = top(&soft).iter().filter(|i| top(&reference).contains(i)).count();
        assert!(shared >= 6, "seed {seed}: {:?} vs {:?}", top(&soft), top(&reference));
    }
}

#[test]
fn random_scores_average_one_half() {
    let x = TimeSeries::zeros(1000, 100).unwrap();
    let map = random_attribution(&x, 2024, Domain::Input);
    assert_eq!(map.scores().len(), 100_000);
    let mean = map.scores().iter().sum::<f64>() / 1e5;
    assert!((mean - 0.5).abs() < 0.01, "{mean}");
    assert!(map.scores().iter().all(|s| (0.0..1.0).contains(s)));
}

#[test]
fn ground_truth_deletion_never_lags_random_deletion() {
    let oracle = single_rule_oracle(T, 5, 0.5);
    let mut values = tone(T, 5, 1.0, 0.3);
    for (v, d) in values.iter_mut().zip(tone(T, 12, 0.7, 2.0)) {
        *v += d;
    }
    let x = series(values);
    let f = independent_bins(T);
    let mut truth = vec![0.0; f];
    truth[5] = 1.0;
    let truth = AttributionMap::new(Domain::Frequency, Method::Frequency, 1, f, 1, truth).unwrap();
    let steps = DeletionSteps::PerUnit;
    let gt = deletion_curve(&oracle, &x, &truth, DeletionSpace::Frequency, steps, Baseline::Zero).unwrap();

    let mut mean = vec![0.0; gt.scores.len()];
    for seed in 0..50 {
        let mut random = random_attribution(&x, seed, Domain::Frequency);
        random.target_class = 1;
        let curve = deletion_curve(&oracle, &x, &random, DeletionSpace::Frequency, steps, Baseline::Zero).unwrap();
        for (m, s) in mean.iter_mut().zip(&curve.scores) {
            *m += s / 50.0;
        }
    }
    for (j, (g, r)) in gt.scores.iter().zip(&mean).enumerate() {
        assert!(*g <= r + 1e-12, "fraction {}: truth {g} random {r}", gt.fractions[j]);
    }
    // Collapse after the single band bin goes.
    let collapsed = 1.0 / (1.0 + 2f64.exp());
    assert!(gt.scores[1..].iter().all(|s| (s - collapsed).abs() < 1e-9));
}

#[test]
fn linear_occlusion_matches_closed_form() {
    let weights = vec![
        (0..16).map(|i| ((i * 5 % 7) as f64 - 3.0) / 4.0).collect::<Vec<_>>(),
        (0..16).map(|i| ((i * 3 % 5) as f64 - 2.0) / 3.0).collect::<Vec<_>>(),
    ];
    let bias = vec![0.2, -0.1];
    let oracle = freqatt_core::ClassifierOracle::from_spec(freqatt_core::ModelSpec {
        num_classes: 2,
        input_length: 8,
        input_channels: 2,
        params: freqatt_core::ModelParams::Linear { weights: weights.clone(), bias: bias.clone() },
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..50 {
        let values: Vec<f64> = (0..16).map(|_| StandardNormal.sample(&mut rng)).collect();
        let logits: Vec<f64> = (0..2)
            .map(|c| bias[c] + weights[c].iter().zip(&values).map(|(w, v)| w * v).sum::<f64>())
            .collect();
        let probs = softmax(&logits);
        let target = if probs[1] > probs[0] { 1 } else { 0 };
        let x = TimeSeries::new(8, 2, values.clone()).unwrap();
        let map = occlusion_attribution(&oracle, &x, &OcclusionConfig::default()).unwrap();
        assert_eq!(map.target_class, target);
        for i in 0..16 {
            let dropped: Vec<f64> = (0..2).map(|c| logits[c] - weights[c][i] * values[i]).collect();
            let expected = probs[target] - softmax(&dropped)[target];
            assert!((map.get(i / 2, i % 2) - expected).abs() < 1e-12);
        }
    }
}
