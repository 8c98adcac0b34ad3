use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rodband_bench::{thick_core, thin_core};
use rodband_core::bloch::{solve_nonlinear_eigen, BlochOperator};
use rodband_core::dirichlet::dirichlet_spectrum;
use rodband_core::dispersion::{band_edges, trace_branches};
use rodband_core::electrostatics::resonances;
use rodband_core::{CouplingConvention, EffectiveModel, LatticeSumTable};

fn lattice(c: &mut Criterion) {
    c.bench_function("lattice sums to order 50, radius 400", |b| {
        b.iter(|| LatticeSumTable::new(black_box(50), 400).unwrap())
    });
}

fn multipole(c: &mut Criterion) {
    let sums = LatticeSumTable::new(50, 400).unwrap();
    let (g, _) = thick_core();
    c.bench_function("resonances N=20 with convergence check", |b| {
        b.iter(|| resonances(&g, &sums, black_box(20), [1.0, 0.0], CouplingConvention::Scaled).unwrap())
    });
}

fn bands(c: &mut Criterion) {
    let sums = LatticeSumTable::new(50, 400).unwrap();
    let mut group = c.benchmark_group("band edges and branches");
    for (name, (g, m)) in [("thick", thick_core()), ("thin", thin_core())] {
        let modes = resonances(&g, &sums, 20, [1.0, 0.0], CouplingConvention::Scaled).unwrap();
        let model = EffectiveModel::new(g, m, dirichlet_spectrum(g.a, 500).unwrap(), &modes);
        let grid: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
        group.bench_function(name, |b| {
            b.iter(|| {
                let r = band_edges(&model, 1.2).unwrap();
                trace_branches(&model, &r, &grid).unwrap()
            })
        });
    }
    group.finish();
}

fn plane_wave(c: &mut Criterion) {
    let (g, m) = thick_core();
    let mut group = c.benchmark_group("plane wave");
    group.sample_size(10);
    let op = BlochOperator::new([0.5, 0.0], 12, &g, &m, true).unwrap();
    group.bench_function("assemble G=12 mirror", |b| b.iter(|| op.assemble(black_box(0.03)).unwrap()));
    group.bench_function("acoustic solve dk=0.5", |b| {
        b.iter(|| solve_nonlinear_eigen(&op, black_box(0.025), 1e-10, 100).unwrap())
    });
    group.finish();
}

criterion_group!(benches, lattice, multipole, bands, plane_wave);
criterion_main!(benches);
