use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use emfsim_core::profiles::{builtin_profile, Generation};
use emfsim_core::simulation::{run_drops, DropEngine, RunConfig};

fn bench_drops(c: &mut Criterion) {
    let config = RunConfig {
        num_drops: 20,
        ..RunConfig::new(builtin_profile(Generation::FiveG))
    };
    let engine = DropEngine::new(&config).unwrap();
    let mut index = 0u64;
    c.bench_function("evaluate_drop", |b| {
        b.iter(|| {
            index += 1;
            engine.evaluate_drop(black_box(index)).unwrap()
        })
    });

    let mut group = c.benchmark_group("run_drops");
    group.sample_size(10);
    group.bench_function("5g_20_drops", |b| {
        b.iter(|| run_drops(black_box(&config)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_drops);
criterion_main!(benches);
