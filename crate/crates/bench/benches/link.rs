use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use emfsim_core::antenna::{attenuation, PatternParams};
use emfsim_core::channel::LinkBudget;
use emfsim_core::layout::LinkGeometry;
use emfsim_core::profiles::{builtin_profile, Generation};
use emfsim_core::SectorId;

fn bench_link(c: &mut Criterion) {
    let profile = builtin_profile(Generation::FiveG);
    let pattern = PatternParams::from_profile(&profile);
    let budget = LinkBudget::new(&profile);
    let geom = LinkGeometry::at(
        42.0,
        17.5,
        profile.bs_antenna_height_m - profile.ue_height_m,
    );

    c.bench_function("attenuation", |b| {
        b.iter(|| attenuation(black_box(&pattern), black_box(17.5), black_box(-11.0)))
    });
    c.bench_function("link_budget_evaluate", |b| {
        b.iter(|| budget.evaluate(SectorId(0), black_box(&geom)))
    });
}

criterion_group!(benches, bench_link);
criterion_main!(benches);
