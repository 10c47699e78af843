use criterion::{black_box, criterion_group, criterion_main, Criterion};

use psfem::constitutive::MaterialParams;
use psfem::plane_stress::condense;
use psfem::{CondensationSettings, MaterialModel, Regime};
use psfem_bench::{cook_system, perturbed_state, sample_cbar};

fn material(c: &mut Criterion) {
    let m = MaterialModel::decoupled(MaterialParams::from_mu_nu(80.1938, 0.4999).unwrap());
    let cbar = sample_cbar();
    let c3 = cbar.embed(0.8);
    c.bench_function("evaluate decoupled 3d", |b| b.iter(|| m.evaluate(black_box(&c3)).unwrap()));
    let s = CondensationSettings::default();
    c.bench_function("condense from unity", |b| b.iter(|| condense(&m, black_box(&cbar), 1.0, &s).unwrap()));
    c.bench_function("condense warm start", |b| b.iter(|| condense(&m, black_box(&cbar), 0.62, &s).unwrap()));
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble cook n16 p2");
    for regime in [Regime::PlaneStrain, Regime::PlaneStress] {
        let sys = cook_system(regime, 2, 16);
        let q = perturbed_state(&sys, 0.1);
        let c33 = sys.initial_c33();
        g.bench_function(regime.name(), |b| b.iter(|| sys.assemble(black_box(&q), &c33, 1.0, true).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, material, assembly);
criterion_main!(benches);
