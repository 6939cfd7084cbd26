//! Statistical behaviour of sampling, measurement simulation and the
//! estimators.

use bellfid_core::rng::trial_rng;
use bellfid_core::{
    assign_bases, draw_sample_set, estimate, iid_model, monte_carlo_error, simulate_measurement,
    werner, BasisAssignment, MixtureOfProducts, PairState, PauliBasis, ProtocolKind, SampleSet,
};

fn bernoulli_sigma(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

#[test]
fn sample_sets_are_uniform() {
    let mut rng = trial_rng(11, 0);
    let draws = 200_000u32;

    let mut ones = 0u32;
    for _ in 0..draws {
        let s = draw_sample_set(2, 1, &mut rng).unwrap();
        ones += u32::from(s.indices()[0] == 1);
    }
    let p = ones as f64 / draws as f64;
    assert!((p - 0.5).abs() <= 4.0 * bernoulli_sigma(0.5, draws as f64));

    let subsets = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
    let mut counts = [0u32; 6];
    for _ in 0..draws {
        let s = draw_sample_set(4, 2, &mut rng).unwrap();
        let k = subsets.iter().position(|x| x == s.indices()).unwrap();
        counts[k] += 1;
    }
    for c in counts {
        let p = c as f64 / draws as f64;
        assert!((p - 1.0 / 6.0).abs() <= 4.0 * bernoulli_sigma(1.0 / 6.0, draws as f64));
    }
}

#[test]
fn random_bases_are_uniform_and_clustered_blocks_fixed() {
    let mut rng = trial_rng(5, 0);
    let sample = SampleSet::new(2000, (0..1000).collect()).unwrap();
    let mut counts = [0u32; 3];
    let rounds = 100;
    for _ in 0..rounds {
        for b in assign_bases(&sample, ProtocolKind::Proposed, &mut rng).bases() {
            counts[b.index()] += 1;
        }
    }
    let total = (rounds * 1000) as f64;
    for c in counts {
        assert!((c as f64 / total - 1.0 / 3.0).abs() <= 4.0 * bernoulli_sigma(1.0 / 3.0, total));
    }

    let sample = SampleSet::new(1000, (0..500).collect()).unwrap();
    let clustered = assign_bases(&sample, ProtocolKind::ClusteredBasis, &mut rng);
    let mut blocks = [0usize; 3];
    for b in clustered.bases() {
        blocks[b.index()] += 1;
    }
    assert_eq!(blocks, [167, 167, 166]);
    assert!(clustered.bases()[..167].iter().all(|b| *b == PauliBasis::X));
    assert!(clustered.bases()[334..].iter().all(|b| *b == PauliBasis::Z));
}

#[test]
fn qber_of_maximally_mixed_pairs_is_one_half() {
    let model = iid_model(1.0, 1000).unwrap();
    assert_eq!(model.components()[0].fidelities()[0], 0.25);
    let mut rng = trial_rng(9, 0);
    let sample = draw_sample_set(1000, 500, &mut rng).unwrap();
    let mut errors = 0usize;
    let trials = 200;
    for _ in 0..trials {
        let bases = assign_bases(&sample, ProtocolKind::Proposed, &mut rng);
        let (k, outcome) = simulate_measurement(&model, &sample, &bases, &mut rng).unwrap();
        assert_eq!(k, 0);
        errors += outcome.error_count();
    }
    let n = (trials * 500) as f64;
    assert!((errors as f64 / n - 0.5).abs() <= 4.0 * bernoulli_sigma(0.5, n));
}

/// Heterogeneous, basis-asymmetric single-component model.
fn asymmetric_single(n: usize) -> MixtureOfProducts {
    let states = (0..n)
        .map(|i| match i % 3 {
            0 => PairState::new([0.7, 0.2, 0.1, 0.0]).unwrap(),
            1 => PairState::new([0.9, 0.0, 0.0, 0.1]).unwrap(),
            _ => werner(0.55).unwrap(),
        })
        .collect();
    MixtureOfProducts::new(vec![(1.0, states)]).unwrap()
}

#[test]
fn proposed_is_unbiased_for_a_fixed_sample() {
    let model = asymmetric_single(20);
    let sample = SampleSet::new(20, vec![0, 1, 2, 4, 5, 7, 8, 12, 15, 19]).unwrap();
    let comp = &model.components()[0];
    let sampled_mean: f64 = sample
        .indices()
        .iter()
        .map(|&i| comp.fidelities()[i])
        .sum::<f64>()
        / 10.0;

    let trials = 100_000u64;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for t in 0..trials {
        let mut rng = trial_rng(21, t);
        let bases = assign_bases(&sample, ProtocolKind::Proposed, &mut rng);
        let (_, outcome) = simulate_measurement(&model, &sample, &bases, &mut rng).unwrap();
        let f = estimate(&outcome, ProtocolKind::Proposed).unwrap();
        sum += f;
        sum_sq += f * f;
    }
    let n = trials as f64;
    let mean = sum / n;
    let se = ((sum_sq / n - mean * mean) * n / (n - 1.0) / n).sqrt();
    assert!(
        (mean - sampled_mean).abs() <= 4.0 * se,
        "{mean} vs {sampled_mean} (se {se})"
    );
}

#[test]
fn per_pair_result_variance() {
    // Random-basis match probability is 2(1 − f)/3 = 0.2 for f = 0.7.
    let f: f64 = 0.7;
    let model = MixtureOfProducts::new(vec![(
        1.0,
        vec![
            PairState::new([0.7, 0.2, 0.1, 0.0]).unwrap(),
            werner(0.7).unwrap(),
        ],
    )])
    .unwrap();
    let sample = SampleSet::new(2, vec![0]).unwrap();
    let draws = 1_000_000u64;
    let mut hits = 0u64;
    let mut rng = trial_rng(33, 0);
    for _ in 0..draws {
        let bases = assign_bases(&sample, ProtocolKind::Proposed, &mut rng);
        let (_, o) = simulate_measurement(&model, &sample, &bases, &mut rng).unwrap();
        hits += o.error_count() as u64;
    }
    let n = draws as f64;
    let p = hits as f64 / n;
    let var = p * (1.0 - p) * n / (n - 1.0);
    let expected = (2.0 * f + 1.0) * (2.0 - 2.0 * f) / 9.0;
    let q = 2.0 * (1.0 - f) / 3.0;
    // Delta method: Var(p̂(1 − p̂)) ≈ (1 − 2q)²·q(1 − q)/n.
    let sigma = (1.0 - 2.0 * q).abs() * bernoulli_sigma(q, n);
    assert!((var - expected).abs() <= 3.0 * sigma, "{var} vs {expected}");
}

#[test]
fn conditional_variance_of_werner_estimate() {
    let fids: Vec<f64> = (0..30).map(|i| 0.5 + 0.5 * (i as f64) / 29.0).collect();
    let model = MixtureOfProducts::from_fidelities(vec![(1.0, fids.clone())]).unwrap();
    let sample = SampleSet::new(30, (0..30).step_by(2).collect()).unwrap();
    let m = sample.len() as f64;
    let expected: f64 = sample
        .indices()
        .iter()
        .map(|&i| (2.0 * fids[i] + 1.0) * (1.0 - fids[i]))
        .sum::<f64>()
        / (2.0 * m * m);

    let trials = 100_000u64;
    let values: Vec<f64> = (0..trials)
        .map(|t| {
            let mut rng = trial_rng(44, t);
            let bases = assign_bases(&sample, ProtocolKind::Proposed, &mut rng);
            let (_, o) = simulate_measurement(&model, &sample, &bases, &mut rng).unwrap();
            estimate(&o, ProtocolKind::Proposed).unwrap()
        })
        .collect();
    let n = trials as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    let se = ((m4 - m2 * m2) / n).sqrt();
    assert!(
        (var - expected).abs() <= 4.0 * se,
        "{var} vs {expected} (se {se})"
    );
}

/// Two components whose low-index third only shows errors outside the x basis.
fn clustered_trap(n: usize) -> MixtureOfProducts {
    let build = |hidden: f64, rest: f64| -> Vec<PairState> {
        (0..n)
            .map(|i| {
                if i < n / 3 {
                    PairState::new([1.0 - hidden, 0.0, hidden, 0.0]).unwrap()
                } else {
                    werner(rest).unwrap()
                }
            })
            .collect()
    };
    MixtureOfProducts::new(vec![(0.5, build(0.3, 0.9)), (0.5, build(0.4, 0.8))]).unwrap()
}

#[test]
fn clustered_bases_are_biased_on_asymmetric_mixtures() {
    let model = clustered_trap(300);
    let proposed = monte_carlo_error(&model, 150, ProtocolKind::Proposed, 10_000, 3).unwrap();
    let clustered =
        monte_carlo_error(&model, 150, ProtocolKind::ClusteredBasis, 10_000, 3).unwrap();
    assert!(
        proposed.bias.abs() <= 4.0 * proposed.bias_stderr,
        "{proposed:?}"
    );
    assert!(
        clustered.bias.abs() > 4.0 * clustered.bias_stderr,
        "{clustered:?}"
    );
}

#[test]
fn identical_seeds_give_identical_outcomes() {
    let model = asymmetric_single(40);
    let run = |seed: u64| {
        (0..50)
            .map(|t| {
                let mut rng = trial_rng(seed, t);
                let s = draw_sample_set(40, 13, &mut rng).unwrap();
                let b = assign_bases(&s, ProtocolKind::Proposed, &mut rng);
                simulate_measurement(&model, &s, &b, &mut rng).unwrap().1
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(run(7), run(7));
    assert_ne!(run(7), run(8));
}

#[test]
fn monte_carlo_independent_of_thread_count() {
    let model = clustered_trap(30);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_error(&model, 10, ProtocolKind::PerBasisDfe, 3000, 17).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.mse.to_bits(), four.mse.to_bits());
    assert_eq!(one.bias.to_bits(), four.bias.to_bits());
    assert_eq!(one.mse_stderr.to_bits(), four.mse_stderr.to_bits());
}

#[test]
fn per_basis_estimator_costs_at_small_samples() {
    let model = iid_model(0.5, 8).unwrap();
    let proposed = monte_carlo_error(&model, 4, ProtocolKind::Proposed, 50_000, 1).unwrap();
    let dfe = monte_carlo_error(&model, 4, ProtocolKind::PerBasisDfe, 50_000, 1).unwrap();
    let sigma = (proposed.mse_stderr.powi(2) + dfe.mse_stderr.powi(2)).sqrt();
    assert!(
        proposed.mse <= dfe.mse - 2.0 * sigma,
        "{proposed:?} {dfe:?}"
    );
}

#[test]
fn fixed_basis_outcomes_follow_match_probability() {
    let state = PairState::new([0.6, 0.1, 0.1, 0.2]).unwrap();
    let model = MixtureOfProducts::new(vec![(1.0, vec![state; 2])]).unwrap();
    let sample = SampleSet::new(2, vec![1]).unwrap();
    let mut rng = trial_rng(2, 0);
    for (basis, q) in [
        (PauliBasis::X, 0.3f64),
        (PauliBasis::Y, 0.2),
        (PauliBasis::Z, 0.3),
    ] {
        let bases = BasisAssignment::new(vec![basis]);
        let draws = 100_000;
        let hits: usize = (0..draws)
            .map(|_| {
                simulate_measurement(&model, &sample, &bases, &mut rng)
                    .unwrap()
                    .1
                    .error_count()
            })
            .sum();
        let p = hits as f64 / draws as f64;
        assert!(
            (p - q).abs() <= 4.0 * bernoulli_sigma(q, draws as f64),
            "{basis:?}: {p}"
        );
    }
}
