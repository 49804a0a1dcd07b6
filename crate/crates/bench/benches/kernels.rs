use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use yangkit::charges::q2q3_norm_dense;
use yangkit::tensor::{cplx, real};
use yangkit::verifier::{default_grid, ybe_residual};
use yangkit::{
    build_hamiltonian_density, build_r_matrix, emit_integrability_equations, full_spectrum, q2q3_commutator_norm,
    sector_spectrum, two_exc_compare, Ansatz, ModelSpec,
};

fn table_point(model: u8) -> ModelSpec {
    ModelSpec::real(model, &[("rho", 1.0), ("phi", 0.0)])
}

fn charges(c: &mut Criterion) {
    let spec = ModelSpec::default_for(9, None).unwrap();
    c.bench_function("q2q3 sparse L=6", |b| b.iter(|| q2q3_commutator_norm(black_box(&spec), 6).unwrap()));
    let h = build_hamiltonian_density(&spec).unwrap();
    c.bench_function("q2q3 dense L=4", |b| b.iter(|| q2q3_norm_dense(black_box(&h), 4).unwrap()));
    let mut g = c.benchmark_group("symbolic");
    g.sample_size(10);
    g.bench_function("su2xsu2 equations L=6", |b| b.iter(|| emit_integrability_equations(&Ansatz::Su2xSu2.density(), 6).unwrap()));
    g.finish();
}

fn yang_baxter(c: &mut Criterion) {
    let r = build_r_matrix(&ModelSpec::default_for(10, None).unwrap()).unwrap();
    c.bench_function("ybe residual", |b| b.iter(|| ybe_residual(black_box(&r), cplx(0.21, 0.05), real(-0.13)).unwrap()));
    let grid = default_grid(&r);
    c.bench_function("ybe grid", |b| {
        b.iter(|| grid.iter().map(|&(u, v)| ybe_residual(&r, u, v).unwrap()).fold(0.0f64, f64::max))
    });
}

fn spectra(c: &mut Criterion) {
    let m8 = table_point(8);
    let m10 = table_point(10);
    c.bench_function("sector L=5 p=5 model 8", |b| b.iter(|| sector_spectrum(black_box(&m8), 5, 5, 1e-8).unwrap()));
    c.bench_function("sector L=5 p=2 model 10", |b| b.iter(|| sector_spectrum(black_box(&m10), 5, 2, 1e-8).unwrap()));
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("full L=5 model 10", |b| b.iter(|| full_spectrum(black_box(&m10), 5).unwrap()));
    g.bench_function("two excitations L=5 model 8", |b| b.iter(|| two_exc_compare(black_box(&m8), 5).unwrap()));
    g.finish();
}

criterion_group!(benches, charges, yang_baxter, spectra);
criterion_main!(benches);
