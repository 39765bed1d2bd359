use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use finsler_bench::{hgf_scene, metric_at};
use finsler_core::connection::Pipeline;
use finsler_core::curvature::CurvatureJets;
use finsler_core::{classify, fit_linear_forms, CurvatureSample, Tensor, Tolerances};

fn connection(c: &mut Criterion) {
    let mut group = c.benchmark_group("connection");
    for name in ["sphere3", "randers3", "quartic3", "sphere4"] {
        let (spec, p) = metric_at(name);
        group.bench_with_input(BenchmarkId::from_parameter(name), &(spec, p), |b, (s, p)| {
            b.iter(|| Pipeline::new(black_box(s), black_box(p), 3).unwrap())
        });
    }
    group.finish();
}

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("curvature");
    group.sample_size(10);
    for name in ["sphere3", "randers3", "schwarzschild4"] {
        let (spec, p) = metric_at(name);
        group.bench_with_input(BenchmarkId::new("order4", name), &(spec.clone(), p.clone()), |b, (s, p)| {
            b.iter(|| CurvatureJets::new(black_box(s), black_box(p), 4).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sample", name), &(spec, p), |b, (s, p)| {
            b.iter(|| CurvatureSample::from_metric(black_box(s), black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn recurrence(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("recurrence");
    for n in [3, 4, 5] {
        let sample = hgf_scene(n, 7).sample().unwrap();
        let big_g = Tensor::big_g(&sample.g);
        group.bench_with_input(BenchmarkId::new("fit", n), &sample, |b, s| {
            b.iter(|| fit_linear_forms(black_box(&s.nabla_riem), &[&s.riem, &big_g], &s.g))
        });
        group.bench_with_input(BenchmarkId::new("classify", n), &sample, |b, s| {
            b.iter(|| classify(std::slice::from_ref(black_box(s)), &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("synth", n), &n, |b, &n| b.iter(|| hgf_scene(n, black_box(11))));
    }
    group.finish();
}

criterion_group!(benches, connection, curvature, recurrence);
criterion_main!(benches);
