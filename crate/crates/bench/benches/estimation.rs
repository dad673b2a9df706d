use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpdens::{
    fit_point_with_se, rbc_pointwise, select_bandwidths, uniform_band, BandwidthResult, BwConfig, BwMethod, FitConfig,
    KernelKind, Target,
};
use lpdens_bench::normal_sample;
use std::hint::black_box;

fn point_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_point_with_se");
    for n in [1_000, 10_000, 100_000] {
        let s = normal_sample(n);
        let target = Target::new(0.3, 0.4, 3, 1, KernelKind::Triangular);
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| {
            b.iter(|| fit_point_with_se(black_box(s), &target).unwrap())
        });
    }
    group.finish();
}

fn bandwidth_selection(c: &mut Criterion) {
    let mut group = c.benchmark_group("select_bandwidths");
    group.sample_size(10);
    let s = normal_sample(2_000);
    let grid = s.quantile_grid(19);
    let cfg = BwConfig::new(2, 1, KernelKind::Triangular);
    for method in [BwMethod::MseRot, BwMethod::MseDpi, BwMethod::ImseDpi] {
        group.bench_function(method.to_string(), |b| {
            b.iter(|| select_bandwidths(black_box(&s), &grid, &method, &cfg).unwrap())
        });
    }
    group.finish();
}

fn inference(c: &mut Criterion) {
    let mut group = c.benchmark_group("inference");
    group.sample_size(10);
    let s = normal_sample(2_000);
    let grid = s.quantile_grid(19);
    let bw = BandwidthResult::user(&s, &grid, &[0.5]).unwrap();
    let cfg = FitConfig::default();
    group.bench_function("rbc_pointwise", |b| {
        b.iter(|| rbc_pointwise(black_box(&s), &bw, &cfg, 0.05).unwrap())
    });
    group.bench_function("uniform_band_2000", |b| {
        b.iter(|| uniform_band(black_box(&s), &bw, &cfg, 0.05, 2000, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, point_fit, bandwidth_selection, inference);
criterion_main!(benches);
