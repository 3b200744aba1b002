use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use cspa_bench::quiet_clutter;
use cspa_core::analysis::{series_stats, unwrap_phase};
use cspa_core::campaign::{run, run_triple};
use cspa_core::model::{fit, generate_interval_stationary, IntervalPlan, ResidualModel, SampleGrid};
use cspa_core::{Complex64, Scenario, Strategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn campaign(c: &mut Criterion) {
    let free = Scenario::default_free_space();
    let clutter = quiet_clutter();
    c.bench_function("run with_movement (free space)", |b| {
        b.iter(|| run(black_box(&free), Strategy::WithMovement, 1).unwrap())
    });
    c.bench_function("run uncompensated (clutter)", |b| {
        b.iter(|| run(black_box(&clutter), Strategy::Uncompensated, 1).unwrap())
    });
    c.bench_function("run_triple (clutter)", |b| {
        b.iter(|| run_triple(black_box(&clutter), 1).unwrap())
    });
}

fn analysis(c: &mut Criterion) {
    let phase: Vec<f64> = (0..10_000)
        .map(|n| ((n as f64) * -0.7).sin() * 3.1)
        .collect();
    c.bench_function("unwrap 10k", |b| b.iter(|| unwrap_phase(black_box(&phase))));
    c.bench_function("series_stats 10k", |b| {
        b.iter(|| series_stats(black_box(&phase)).unwrap())
    });
}

fn model(c: &mut Criterion) {
    let h0 = Complex64::from_polar(0.0068, -0.29);
    let plan = IntervalPlan::single(h0, 100_000);
    let residual = ResidualModel::default();
    let grid = SampleGrid::default();
    c.bench_function("generate + fit 1e5", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let g = generate_interval_stationary(&plan, &residual, &grid, &mut rng, |_| h0).unwrap();
            fit(&g.trace).unwrap()
        })
    });
}

criterion_group!(benches, campaign, analysis, model);
criterion_main!(benches);
