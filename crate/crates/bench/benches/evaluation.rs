use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use zipper::presets::{build_example1, build_example2, Example1Config, Example2Config};
use zipper::{hausdorff_distance, refine, refine_parametrized, Parametrization, SmoothLift};

fn evaluation(c: &mut Criterion) {
    let (zipper, line) = build_example2(Example2Config::new(0.5)).unwrap();
    let param = Parametrization::new(&zipper, &line).unwrap();
    c.bench_function("eval_f rotation h=0.5 tol=1e-12", |b| {
        b.iter(|| param.eval(black_box(0.3141592653589793), 1e-12).unwrap())
    });

    let (zipper, line) = build_example1(Example1Config::split(0.3)).unwrap();
    let lift = SmoothLift::new(&zipper, &line).unwrap();
    c.bench_function("eval_g split p=0.3 tol=1e-12", |b| {
        b.iter(|| lift.eval_g(black_box(0.3141592653589793), 1e-12).unwrap())
    });
}

fn attractor(c: &mut Criterion) {
    let (zipper, line) = build_example2(Example2Config::new(0.3)).unwrap();
    c.bench_function("refine depth 12", |b| {
        b.iter(|| refine(black_box(&zipper), 12).unwrap())
    });

    let coarse = refine_parametrized(&zipper, &line, 8).unwrap().points;
    let fine = refine_parametrized(&zipper, &line, 9).unwrap().points;
    c.bench_function("hausdorff 513 x 1025", |b| {
        b.iter(|| hausdorff_distance(black_box(&coarse), black_box(&fine)))
    });
}

criterion_group!(benches, evaluation, attractor);
criterion_main!(benches);
