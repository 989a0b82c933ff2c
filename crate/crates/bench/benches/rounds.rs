use std::hint::black_box;

use adaprod::experiment::seeded_stream;
use adaprod::{sample_batch, AdaProdLearner, LossVector, ProbabilityVector, TimeVaryingLearner};
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

/// Deterministic pseudo-random losses in [0, 1).
fn losses(n: usize, round: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (0.618_033_988_7 * i as f64 + 0.414_213_562_3 * round as f64).fract())
        .collect()
}

/// A learner after `rounds` non-sleeping optimistic rounds, with its next
/// distribution and prediction.
fn warmed_learner(n: usize, rounds: usize) -> (AdaProdLearner, ProbabilityVector, Vec<f64>) {
    let mut learner = AdaProdLearner::new(n).unwrap();
    let mut rhat = vec![0.0; n];
    let mut p = learner.distribution(&rhat).unwrap();
    for t in 1..=rounds {
        let loss = LossVector::new(losses(n, t), t).unwrap();
        let out = learner
            .observe_optimistic(&loss, &p, &rhat, loss.values(), &[])
            .unwrap();
        rhat = out.prediction.unwrap().rhat;
        p = out.next.unwrap();
    }
    (learner, p, rhat)
}

fn learner_round(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimistic_round");
    for (n, rounds) in [(10, 500), (100, 200)] {
        let (learner, p, rhat) = warmed_learner(n, rounds);
        let t = rounds + 1;
        let loss = LossVector::new(losses(n, t), t).unwrap();
        let lhat = losses(n, t - 1);
        group.bench_with_input(BenchmarkId::new("experts", learner.expert_count()), &n, |b, _| {
            b.iter_batched(
                || learner.clone(),
                |mut l| black_box(l.observe_optimistic(&loss, &p, &rhat, &lhat, &[]).unwrap()),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn batch_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_batch");
    for (n, b) in [(100, 5), (1000, 10), (1000, 100)] {
        let weights: Vec<f64> = losses(n, 1).iter().map(|v| v * v * v).collect();
        let p = ProbabilityVector::from_weights(&weights).unwrap();
        let mut rng = seeded_stream(7, 1);
        group.bench_with_input(BenchmarkId::new(format!("n{n}"), b), &b, |bench, &b| {
            bench.iter(|| black_box(sample_batch(&p, b, &mut rng).unwrap()))
        });
    }
    group.finish();
}

fn time_varying_step(c: &mut Criterion) {
    let n = 50;
    let mut group = c.benchmark_group("time_varying_step");
    for (name, make) in [
        ("ada_normal_hedge", TimeVaryingLearner::adanormalhedge as fn(usize) -> _),
        ("squint", TimeVaryingLearner::squint),
    ] {
        let mut learner = make(n).unwrap();
        for t in 1..=200 {
            learner.step(&LossVector::new(losses(n, t), t).unwrap()).unwrap();
        }
        let loss = LossVector::new(losses(n, 201), 201).unwrap();
        group.bench_function(name, |b| {
            b.iter_batched(
                || learner.clone(),
                |mut l| black_box(l.step(&loss).unwrap()),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, learner_round, batch_sampling, time_varying_step);
criterion_main!(benches);
