use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ldg_core::energy::{energy, energy_gradient};
use ldg_core::grid::{Grid, OrderField};
use ldg_core::solver::{initialize, SeedKind};
use ldg_core::tensor::{eigen_data, lift, p_invariant, s_invariant, Obstacle, Params, UVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> Params {
    Params::new(20.0, 50.0, Obstacle::PlusFamily(-0.95)).unwrap()
}

fn hedgehog(grid: &Grid, p: &Params) -> OrderField {
    initialize(&SeedKind::Hedgehog, grid, p).unwrap()
}

fn bench_pointwise(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let us: Vec<UVec> = (0..1024)
        .map(|_| {
            UVec::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
        })
        .collect();
    c.bench_function("lift_and_s_invariant", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for (k, u) in us.iter().enumerate() {
                let w = lift(*u, k as f64 * 0.01);
                acc += s_invariant(black_box(&w)) - p_invariant(*u);
            }
            acc
        })
    });
    c.bench_function("eigen_data", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for u in &us {
                acc += eigen_data(black_box(*u)).sorted[2];
            }
            acc
        })
    });
}

fn bench_field_ops(c: &mut Criterion) {
    let grid = Grid::build(128).unwrap();
    let p = params();
    let field = hedgehog(&grid, &p);
    c.bench_function("energy_n128", |b| {
        b.iter(|| energy(black_box(&field), &grid, &p).unwrap().total)
    });
    c.bench_function("energy_gradient_n128", |b| {
        b.iter(|| energy_gradient(black_box(&field), &grid, &p).unwrap().len())
    });
}

criterion_group!(benches, bench_pointwise, bench_field_ops);
criterion_main!(benches);
