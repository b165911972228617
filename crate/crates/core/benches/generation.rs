use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use lhv::analysis::{bin_batch, uniform_edges};
use lhv::exec::Execution;
use lhv::model::ModelParams;
use lhv::montecarlo::{generate, SimConfig};
use lhv::verify::{full_verification, GridSpec};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn params() -> ModelParams {
    ModelParams::from_mixing(0.776).unwrap()
}

fn bench_generate(c: &mut Criterion) {
    let n = 100_000;
    let cfg = SimConfig::new(params(), n, 7);
    let mut group = c.benchmark_group("generate");
    group.throughput(Throughput::Elements(n));
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| generate(cfg, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_binning(c: &mut Criterion) {
    let batch = generate(SimConfig::new(params(), 1_000_000, 7), Execution::Parallel).unwrap();
    let edges = uniform_edges(50, 5.0).unwrap();
    let mut group = c.benchmark_group("bin_events");
    group.throughput(Throughput::Elements(batch.events.len() as u64));
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| bin_batch(&batch, &edges, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_verify(c: &mut Criterion) {
    let p = params();
    let grid = GridSpec::default_for(&p);
    let mut group = c.benchmark_group("full_verification");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| full_verification(&p, grid, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_generate, bench_binning, bench_verify);
criterion_main!(benches);
