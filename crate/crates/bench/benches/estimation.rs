//! Cost of one loss evaluation and of the identifiability diagnostic; the
//! loss dominates the multi-start estimation budget.

use criterion::{criterion_group, criterion_main, Criterion};
use glyco_bench::unit_slow;
use glyco_core::estimation::{loss, Dataset, LossOptions};
use glyco_core::identifiability::{check, select_points, SelectionStrategy};
use glyco_core::network::EffectiveParams;
use glyco_core::reduced::{solve, SolverOptions};
use std::hint::black_box;

fn bench_loss(c: &mut Criterion) {
    let theta = EffectiveParams::benchmark_truth();
    let sol = solve(&theta, &unit_slow(), 20.0, &SolverOptions::default()).unwrap();
    let data = Dataset::from_ode(&sol, 2000).unwrap();
    let opts = LossOptions::default();
    // A perturbed candidate, so the solve inside the loss is not the
    // trivial self-fit.
    let candidate = EffectiveParams::from_array(theta.as_array().map(|v| v * 1.3));
    c.bench_function("loss_eval_t20", |b| {
        b.iter(|| black_box(loss(&candidate, &data, &opts)))
    });
}

fn bench_identifiability(c: &mut Criterion) {
    let theta = EffectiveParams::benchmark_truth();
    let sol = solve(&theta, &unit_slow(), 20.0, &SolverOptions::default()).unwrap();
    c.bench_function("identifiability_equitime", |b| {
        b.iter(|| {
            let points = select_points(&sol, SelectionStrategy::Equitime, 0).unwrap();
            black_box(check(&points, 1e12))
        })
    });
}

criterion_group!(benches, bench_loss, bench_identifiability);
criterion_main!(benches);
