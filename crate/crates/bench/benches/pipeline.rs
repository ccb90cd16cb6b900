use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;
use trapecho_core::{
    propagate, revival_from_radii, revival_radii, sample_ensemble, verlet_step, IntegratorConfig,
    ParticleState, ProbeConfig, SamplerConfig, TrapConfig,
};

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn dynamics(c: &mut Criterion) {
    let trap = TrapConfig::natural();
    let cfg = IntegratorConfig::for_trap(&trap);
    let p = ParticleState::new(0.3, -0.1, 0.2, 0.4);
    c.bench_function("verlet_step", |b| {
        b.iter(|| verlet_step(&trap, black_box(&p), cfg.dt))
    });
    let mut group = c.benchmark_group("propagate");
    group.throughput(Throughput::Elements(1000));
    group.bench_function("one_period", |b| {
        b.iter(|| propagate(&trap, black_box(&p), trap.period(), &cfg).unwrap())
    });
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let trap = TrapConfig::natural();
    let mut group = c.benchmark_group("sample_ensemble");
    for n in [1_000, 10_000] {
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| sample_ensemble(&trap, &SamplerConfig::new(1.0, n, 1)).unwrap())
        });
    }
    group.finish();
}

fn revival(c: &mut Criterion) {
    let trap = TrapConfig::natural();
    let cfg = IntegratorConfig::for_trap(&trap);
    let t = trap.period();
    let particles = sample_ensemble(&trap, &SamplerConfig::new(1.0, 1000, 1))
        .unwrap()
        .particles;
    let seps = linspace(0.0, 3.0 * t, 61);
    let probe = ProbeConfig::with_phi0(0.45, 1.0).unwrap();

    let mut group = c.benchmark_group("revival");
    group.sample_size(10);
    group.bench_function("trajectories_1000x61", |b| {
        b.iter(|| revival_radii(&particles, &trap, 1.5 * t, &seps, &cfg).unwrap())
    });
    let radii = revival_radii(&particles, &trap, 1.5 * t, &seps, &cfg).unwrap();
    group.bench_function("contrast_1000x61", |b| {
        b.iter(|| revival_from_radii(&radii, &trap, black_box(&probe), 1.5 * t).unwrap())
    });
    group.finish();
}

criterion_group!(benches, dynamics, sampling, revival);
criterion_main!(benches);
