use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fdpnet_core::synth::{generate_system, DEFAULT_BETA_RANGE};
use fdpnet_core::trex::{generate_dummies, lars_run, run_experiments, standardize};
use fdpnet_core::{trex_select, Analytical, CalibrationGrid, DistributionSpec, FeatureMeta, LossSpec, MlpParams, Seed, SystemConfig, TrexConfig};
use std::hint::black_box;

fn system(n: usize, p: usize) -> fdpnet_core::SyntheticSystem {
    let cfg = SystemConfig {
        n,
        p,
        s: 3,
        snr: 1.0,
        beta_range: DEFAULT_BETA_RANGE,
        distribution: DistributionSpec::standard_gaussian(),
    };
    generate_system(&cfg, Seed(1)).expect("system")
}

fn lars(c: &mut Criterion) {
    let mut group = c.benchmark_group("lars_run");
    for &(n, p) in &[(15, 30), (100, 200), (300, 523)] {
        let sys = system(n, p);
        let data = standardize(sys.x.view(), sys.y.view()).unwrap();
        let dummies = generate_dummies(n, p, Seed(2));
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{p}")), &(), |b, _| {
            b.iter(|| lars_run(black_box(&data), dummies.view(), 10).unwrap())
        });
    }
    group.finish();
}

fn selector(c: &mut Criterion) {
    let mut group = c.benchmark_group("trex");
    group.sample_size(20);
    let cfg = TrexConfig::default();
    let grid = CalibrationGrid::with_defaults(10, 0.2).unwrap();
    for &(n, p) in &[(15, 30), (100, 200)] {
        let sys = system(n, p);
        group.bench_function(BenchmarkId::new("experiments", format!("{n}x{p}")), |b| {
            b.iter(|| run_experiments(sys.x.view(), sys.y.view(), &cfg, Seed(3)).unwrap())
        });
        group.bench_function(BenchmarkId::new("select", format!("{n}x{p}")), |b| {
            b.iter(|| trex_select(sys.x.view(), sys.y.view(), &cfg, &grid, &Analytical, Seed(3)).unwrap())
        });
    }
    group.finish();
}

fn network(c: &mut Criterion) {
    let meta = FeatureMeta { p_max: 30, t_max_norm: 10.0 };
    let params = MlpParams::standard(meta, Seed(4));
    let features: Vec<f64> = (0..meta.input_dim()).map(|i| (i % 7) as f64 / 7.0).collect();
    let batch: Vec<(Vec<f64>, f64)> = (0..256).map(|i| (features.clone(), (i % 10) as f64 / 10.0)).collect();
    let spec = LossSpec::default();
    c.bench_function("mlp/forward", |b| b.iter(|| params.forward(black_box(&features)).unwrap()));
    c.bench_function("mlp/backprop_256", |b| b.iter(|| params.backprop(black_box(&batch), &spec).unwrap()));
}

criterion_group!(benches, lars, selector, network);
criterion_main!(benches);
