use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sdft::bench::{run_trials, run_trials_sequential, Algorithm, TrialConfig};

const N: usize = 1 << 14;
const TRIALS: usize = 32;

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    for (algorithm, k) in [
        (Algorithm::Progressive, 64),
        (Algorithm::Progressive, 256),
        (Algorithm::Submatrix, 32),
    ] {
        let cfg = TrialConfig {
            eta: 5,
            seed: 1,
            ..TrialConfig::new(algorithm, N, k)
        };
        let id = format!("{algorithm}/k{k}");
        group.bench_with_input(BenchmarkId::new("sequential", &id), &cfg, |b, cfg| {
            b.iter(|| run_trials_sequential(cfg, TRIALS).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("parallel", &id), &cfg, |b, cfg| {
            b.iter(|| run_trials(cfg, TRIALS).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
