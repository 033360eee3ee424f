use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use icboot_core::rng::{stream, Purpose};
use icboot_core::{
    bmse_curve, bootstrap_roots, isotonic_weighted, npmle_dataset, sample_scenario,
    simulate_chernoff, BootstrapConfig, BootstrapScheme, ChernoffConfig, Dataset, Design, EventLaw,
    IcmOptions, Scenario,
};

fn data(scenario: Scenario, n: usize) -> Dataset {
    sample_scenario(&scenario, n, &mut stream(1, Purpose::Dataset, 0, 0)).unwrap()
}

fn mixed() -> Scenario {
    Scenario {
        law: EventLaw::Exponential(1.0),
        design: Design::Mixed { kmax: 3, b: 2.0 },
    }
}

fn isotonic(c: &mut Criterion) {
    let mut group = c.benchmark_group("isotonic");
    for n in [100, 1000, 10_000] {
        let values: Vec<f64> = (0..n)
            .map(|i| ((i * 7919) % 1000) as f64 / 1000.0)
            .collect();
        let weights = vec![1.0; n];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| isotonic_weighted(&values, &weights).unwrap())
        });
    }
    group.finish();
}

fn npmle(c: &mut Criterion) {
    let mut group = c.benchmark_group("npmle");
    for n in [100, 1000] {
        let cs = data(Scenario::exponential_current_status(), n);
        group.bench_with_input(BenchmarkId::new("current_status", n), &cs, |b, d| {
            b.iter(|| npmle_dataset(d, IcmOptions::default()).unwrap())
        });
        let mc = data(mixed(), n);
        group.bench_with_input(BenchmarkId::new("mixed_case", n), &mc, |b, d| {
            b.iter(|| npmle_dataset(d, IcmOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn bootstrap(c: &mut Criterion) {
    let mut group = c.benchmark_group("bootstrap");
    group.sample_size(10);
    let cfg = BootstrapConfig::new(BootstrapScheme::FromSmle(0.3), 100, 1);
    let cs = data(Scenario::exponential_current_status(), 500);
    group.bench_function("current_status_n500_b100", |b| {
        b.iter(|| bootstrap_roots(&cs, 1.0, &cfg).unwrap())
    });
    let mc = data(mixed(), 100);
    group.bench_function("mixed_case_n100_b100", |b| {
        b.iter(|| bootstrap_roots(&mc, 1.0, &cfg).unwrap())
    });
    let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
    group.bench_function("bmse_n500_b100", |b| {
        b.iter(|| bmse_curve(&cs, 1.0, BootstrapScheme::FromSmle(0.5), &grid, 100, 1).unwrap())
    });
    group.finish();
}

fn chernoff(c: &mut Criterion) {
    let mut group = c.benchmark_group("chernoff");
    group.sample_size(10);
    let cfg = ChernoffConfig {
        replicates: 100,
        ..ChernoffConfig::default()
    };
    group.bench_function("100_paths", |b| b.iter(|| simulate_chernoff(&cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, isotonic, npmle, bootstrap, chernoff);
criterion_main!(benches);
