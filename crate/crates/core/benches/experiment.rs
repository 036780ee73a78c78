use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use strategia::dynamics::{sample_experiment, ExperimentConfig};
use strategia::rules::BoardSpec;
use strategia::tablebase::{solve_with, MaterialClass, SolveOptions};

fn experiment(c: &mut Criterion) {
    let mc = MaterialClass::parse("KRvK", BoardSpec::standard()).unwrap();
    let tb = solve_with(&mc, &SolveOptions { workers: 1, mem_budget_mb: 2048 }).unwrap();
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut counts = vec![1, 2, cores.max(2)];
    counts.dedup();

    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    for workers in counts {
        let mut cfg = ExperimentConfig::new(200, 42);
        cfg.workers = workers;
        let label = if workers == 1 { "sequential".to_string() } else { format!("parallel-{workers}") };
        group.bench_with_input(BenchmarkId::new("KRvK-200", label), &cfg, |b, cfg| {
            b.iter(|| sample_experiment(&tb, cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, experiment);
criterion_main!(benches);
