use criterion::{criterion_group, criterion_main, Criterion};

use psfem::solver;
use psfem::{Regime, SolveSettings};
use psfem_bench::cook_system;

fn cook(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve cook p2");
    g.sample_size(10);
    for regime in Regime::ALL {
        let n = if regime == Regime::ThreeD { 4 } else { 8 };
        let sys = cook_system(regime, 2, n);
        g.bench_function(format!("{} n{n}", regime.name()), |b| b.iter(|| solver::run(&sys, &SolveSettings::default()).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, cook);
criterion_main!(benches);
