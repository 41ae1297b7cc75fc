//! Throughput of the simulation core: full-chain SSA paths across scaling
//! parameters, the frozen-fast subsystem, and the reduced solver.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use glyco_bench::{benchmark_rates, initial_state, regime, unit_slow};
use glyco_core::network::EffectiveParams;
use glyco_core::reduced::{solve, SolverOptions};
use glyco_core::ssa::{simulate, simulate_frozen_fast, FastState, Recording};
use std::hint::black_box;

fn bench_ssa(c: &mut Criterion) {
    let kappa = benchmark_rates();
    let mut group = c.benchmark_group("ssa_path_t1");
    group.sample_size(10);
    for n in [100u64, 1_000, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            let reg = regime(n);
            let x0 = initial_state(n);
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                black_box(simulate(x0, &kappa, &reg, 1.0, seed, Recording::SlowJumps).unwrap())
            });
        });
    }
    group.finish();
}

fn bench_frozen_fast(c: &mut Criterion) {
    let kappa = benchmark_rates();
    let zs = unit_slow();
    c.bench_function("frozen_fast_t100", |b| {
        let zf0 = FastState([1, 4, 1, 0, 0, 5, 0]);
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            black_box(simulate_frozen_fast(&zs, zf0, &kappa, 100.0, seed).unwrap())
        });
    });
}

fn bench_reduced_solve(c: &mut Criterion) {
    let theta = EffectiveParams::benchmark_truth();
    let z0 = unit_slow();
    c.bench_function("reduced_solve_t20", |b| {
        b.iter(|| black_box(solve(&theta, &z0, 20.0, &SolverOptions::default()).unwrap()))
    });
}

criterion_group!(benches, bench_ssa, bench_frozen_fast, bench_reduced_solve);
criterion_main!(benches);
