//! Sequential vs parallel execution of the hot loops. Both paths compute identical results.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use xbf::bloom::{min_filter_length, KRule};
use xbf::exec::Execution;
use xbf::graph::betweenness_weights;
use xbf::partition::{jigsaw, PartitionConfig};
use xbf::sim::{run_experiment, ExperimentConfig};
use xbf::topo::{gen_ba, gen_traffic, TrafficModel};

const PATHS: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench(c: &mut Criterion) {
    let g = gen_ba(500, 2, 1).unwrap();
    let w = betweenness_weights(&g, Execution::Parallel);
    let parts = jigsaw(&g, &w, &PartitionConfig::default()).unwrap();

    let mut group = c.benchmark_group("betweenness_weights");
    for (name, exec) in PATHS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| betweenness_weights(black_box(&g), exec))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("gen_traffic");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| gen_traffic(black_box(&g), &TrafficModel::uniform(), 2, 7, exec).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("run_experiment");
    group.sample_size(10);
    for (name, exec) in PATHS {
        let cfg = ExperimentConfig {
            sinks: vec![1, 10, 20],
            trials: 200,
            exec,
            ..Default::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_experiment(black_box(&g), Some(&parts), &cfg).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("min_filter_length");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                min_filter_length(black_box(&g), 5, 0.95, KRule::OptimalPerTree, 100, 3, exec)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
