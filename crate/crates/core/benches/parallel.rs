//! Sequential versus rayon execution of the two heavy workloads.
//!
//! With the `parallel` feature off both modes run sequentially, which makes
//! the comparison a check of the fallback's overhead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use igs_core::{
    grid_search_optimum, run_sweep, ChannelRealization, ExecutionMode, ExperimentConfig, OracleConfig, ScenarioParams,
};

const MODES: [ExecutionMode; 2] = [ExecutionMode::Sequential, ExecutionMode::Parallel];

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_sweep");
    group.sample_size(10);
    for mode in MODES {
        let mut cfg = ExperimentConfig::new(0.8, vec![10.0, 100.0], vec![1.0, 10.0, 100.0, 1000.0]);
        cfg.trials = 20_000;
        cfg.seed = 7;
        cfg.execution = mode;
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &cfg, |b, cfg| {
            b.iter(|| run_sweep(black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn oracle_grid(c: &mut Criterion) {
    let scenario = ScenarioParams::new(100.0, 10.0, 1.0, 0.7).unwrap();
    let channel = ChannelRealization::from_squared_moduli(0.8, 0.3, 0.6, 1.2).unwrap();
    let mut group = c.benchmark_group("grid_search_optimum");
    for mode in MODES {
        let cfg = OracleConfig {
            execution: mode,
            ..OracleConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{mode:?}")), &cfg, |b, cfg| {
            b.iter(|| grid_search_optimum(black_box(&scenario), black_box(&channel), cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, oracle_grid);
criterion_main!(benches);
