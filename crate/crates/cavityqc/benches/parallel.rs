//! Sequential vs rayon comparison for the data-parallel hot paths:
//! multistart synthesis restarts and batched sequence evaluation.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cavityqc::sequence::{evaluate, gate_fidelity, ControlSequence, GateTarget};
use cavityqc::synthesis::{synthesize_with, OptimizationConfig, Pattern, Threading};

fn synthesis_config(restarts: usize) -> OptimizationConfig {
    OptimizationConfig {
        step_count: 72,
        pattern: Pattern::three_axis(),
        restarts,
        // fixed, non-converging workload so both paths do identical work
        max_iterations: 40,
        tolerance: 1e-16,
        seed: 42,
        ..Default::default()
    }
}

fn bench_multistart(c: &mut Criterion) {
    let target = GateTarget::cnot();
    let mut group = c.benchmark_group("synthesize_multistart");
    group.sample_size(10);
    for restarts in [8, 16] {
        group.bench_with_input(BenchmarkId::new("sequential", restarts), &restarts, |b, &r| {
            let config = synthesis_config(r);
            b.iter(|| synthesize_with(&target, &config, Threading::Sequential).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("rayon", restarts), &restarts, |b, &r| {
            let config = synthesis_config(r);
            b.iter(|| synthesize_with(&target, &config, Threading::Rayon).unwrap());
        });
    }
    group.finish();
}

fn random_sequences(count: usize) -> Vec<ControlSequence> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    (0..count)
        .map(|k| {
            let sigmas: Vec<f64> = (0..72).map(|_| rng.gen_range(-3.0..3.0)).collect();
            ControlSequence::from_sigmas(format!("seq{k}"), &sigmas)
        })
        .collect()
}

fn bench_batch_evaluate(c: &mut Criterion) {
    let seqs = random_sequences(64);
    let target = GateTarget::cnot();
    let mut group = c.benchmark_group("batch_evaluate_fidelity");
    group.bench_function("sequential", |b| {
        b.iter(|| {
            seqs.iter()
                .map(|s| gate_fidelity(&evaluate(s), &target.matrix).unwrap())
                .fold(0.0f64, f64::max)
        })
    });
    group.bench_function("rayon", |b| {
        use rayon::prelude::*;
        b.iter(|| {
            seqs.par_iter()
                .map(|s| gate_fidelity(&evaluate(s), &target.matrix).unwrap())
                .reduce(|| 0.0f64, f64::max)
        })
    });
    group.finish();
}

criterion_group!(benches, bench_multistart, bench_batch_evaluate);
criterion_main!(benches);
