use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdamp::analytic::{memory_residual_homogeneous, q_homogeneous};
use qdamp::coupling::susceptibility_quadrature;
use qdamp::oracle::{build_bath, integrate};
use qdamp::quantization::{build_coefficients, verify_commutators};
use qdamp::thermal::{thermal_energy, ThermalParams};
use qdamp::{kramers_kronig_check, CouplingSpec, OscillatorParams, SpectralGrid, Susceptibility};

fn params() -> OscillatorParams {
    OscillatorParams::new(3.0, 1.0).unwrap()
}

fn closed_forms(c: &mut Criterion) {
    let p = params();
    c.bench_function("q_homogeneous", |b| b.iter(|| q_homogeneous(&p, 1.0, black_box(2.5))));
    c.bench_function("memory_residual", |b| b.iter(|| memory_residual_homogeneous(&p, 1.0, black_box(2.5)).unwrap()));
}

fn coupling(c: &mut Criterion) {
    let p = params();
    let oh = CouplingSpec::ohmic(p);
    c.bench_function("susceptibility_quadrature", |b| {
        b.iter(|| susceptibility_quadrature(&oh, &p, black_box(4.0)).unwrap())
    });
    let mut group = c.benchmark_group("kramers_kronig");
    for n in [1000usize, 4000] {
        let g = SpectralGrid::trapezoid(0.0, 100.0, n, 1e-4).unwrap();
        let s = Susceptibility::ohmic(&p, g.nodes().to_vec());
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| kramers_kronig_check(&s, &g).unwrap())
        });
    }
    group.finish();
}

fn eigenmodes(c: &mut Criterion) {
    let p = params();
    let oh = CouplingSpec::ohmic(p);
    let g = SpectralGrid::trapezoid(1e-4, 500.0, 40_000, 1e-4).unwrap();
    c.bench_function("build_coefficients_40k", |b| b.iter(|| build_coefficients(&oh, &p, &g).unwrap()));
    let ec = build_coefficients(&oh, &p, &g).unwrap();
    c.bench_function("verify_commutators_40k", |b| b.iter(|| verify_commutators(&ec, &oh).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let p = params();
    let mut group = c.benchmark_group("oracle_t1");
    group.sample_size(10);
    for n in [500usize, 2000] {
        let bath = build_bath(&CouplingSpec::ohmic(p), &SpectralGrid::midpoint(100.0, n, 1e-4).unwrap())
            .unwrap()
            .with_system(1.0, 0.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| integrate(&bath, &p, (0.0, 1.0), 5e-4).unwrap())
        });
    }
    group.finish();
}

fn thermal(c: &mut Criterion) {
    let p = params();
    let oh = CouplingSpec::ohmic(p);
    let tp = ThermalParams::new(3.0, 1e-4).unwrap();
    c.bench_function("thermal_energy", |b| b.iter(|| thermal_energy(&p, &oh, black_box(&tp)).unwrap()));
}

criterion_group!(benches, closed_forms, coupling, eigenmodes, oracle, thermal);
criterion_main!(benches);
