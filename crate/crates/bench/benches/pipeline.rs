use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use unsemi_bench::{gallery_formulas, gallery_lift, small_config, two_points};
use unsemi_core::gadget::circle_bridge;
use unsemi_core::lift::compile_formula;
use unsemi_core::verify::{check_projection, sample_start, solve_on_variety};

fn compile(c: &mut Criterion) {
    let mut group = c.benchmark_group("compile");
    for (name, f) in gallery_formulas() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &f, |b, f| {
            b.iter(|| compile_formula(black_box(f)).unwrap())
        });
    }
    group.finish();
}

fn eval_grad(c: &mut Criterion) {
    let (_, lift) = gallery_lift("disk_minus_open_disk");
    let x = vec![0.3; lift.base_dim() + lift.aux_dim()];
    c.bench_function("eval_grad/disk_minus_open_disk", |b| b.iter(|| lift.compiled().eval_grad(black_box(&x))));
}

fn solve(c: &mut Criterion) {
    let (_, lift) = gallery_lift("annulus");
    let cfg = small_config(3);
    let bounds = cfg.search_box(&lift).unwrap();
    let starts: Vec<Vec<f64>> = (0..64).map(|i| sample_start(&bounds, 0, i)).collect();
    c.bench_function("solve/annulus_64_starts", |b| {
        b.iter(|| starts.iter().filter(|s| solve_on_variety(&lift, s, &bounds, cfg.delta_variety).is_ok()).count())
    });
}

fn check(c: &mut Criterion) {
    let mut group = c.benchmark_group("check_projection");
    group.sample_size(10);
    for name in ["interval", "unit_disk", "half_disk"] {
        let (f, lift) = gallery_lift(name);
        let cfg = small_config(2);
        group.bench_function(name, |b| b.iter(|| check_projection(&f, &lift, &cfg).unwrap()));
    }
    group.finish();
}

fn bridge(c: &mut Criterion) {
    let (lift, pair) = two_points();
    c.bench_function("circle_bridge/two_points", |b| b.iter(|| circle_bridge(black_box(&lift), &pair, 1e-8).unwrap()));
}

criterion_group!(benches, compile, eval_grad, solve, check, bridge);
criterion_main!(benches);
