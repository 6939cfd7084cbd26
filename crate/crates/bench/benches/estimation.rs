use std::hint::black_box;

use bellfid_bench::{correlated_fixture, iid_fixture, M_SAMPLED, N_PAIRS};
use bellfid_core::dense::{random_density, twirl_channel};
use bellfid_core::rng::trial_rng;
use bellfid_core::{
    assign_bases, conditional_target, correlated_model, draw_sample_set, estimate, exact_error,
    monte_carlo_error, simulate_measurement, NoiseParams, ProtocolKind,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn single_trial(c: &mut Criterion) {
    let iid = iid_fixture();
    let correlated = correlated_fixture();
    let mut group = c.benchmark_group("trial");
    for (name, model) in [("iid", &iid), ("correlated", &correlated)] {
        group.bench_function(name, |b| {
            let mut t = 0;
            b.iter(|| {
                let mut rng = trial_rng(1, t);
                t += 1;
                let sample = draw_sample_set(N_PAIRS, M_SAMPLED, &mut rng).unwrap();
                let bases = assign_bases(&sample, ProtocolKind::Proposed, &mut rng);
                let (_, outcome) = simulate_measurement(model, &sample, &bases, &mut rng).unwrap();
                let est = estimate(&outcome, ProtocolKind::Proposed).unwrap();
                black_box(est - conditional_target(model, &outcome).unwrap())
            })
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let model = correlated_fixture();
    let mut group = c.benchmark_group("monte_carlo_1000_trials");
    group.sample_size(10);
    for kind in ProtocolKind::ALL {
        group.bench_function(kind.name(), |b| {
            b.iter(|| monte_carlo_error(black_box(&model), M_SAMPLED, kind, 1000, 7).unwrap())
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let model = correlated_model(NoiseParams::new(0.4, 0.4).unwrap(), 8).unwrap();
    c.bench_function("exact_error_n8_m3", |b| {
        b.iter(|| exact_error(black_box(&model), 3, ProtocolKind::Proposed).unwrap())
    });
}

fn dense_twirl(c: &mut Criterion) {
    let mut rng = trial_rng(3, 0);
    let rho = random_density(3, &mut rng).unwrap();
    c.bench_function("twirl_channel_3_pairs", |b| {
        b.iter(|| twirl_channel(black_box(&rho), 3).unwrap())
    });
}

criterion_group!(benches, single_trial, monte_carlo, enumeration, dense_twirl);
criterion_main!(benches);
