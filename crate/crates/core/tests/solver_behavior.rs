//! Cross-module solver properties that need real minimization runs:
//! penalty/projection agreement, warm-start economics, reflection
//! symmetry of the extended field, and bitwise determinism.

use ldg_core::energy::energy;
use ldg_core::grid::{sample, Grid, FOUR_PI};
use ldg_core::solver::{
    continuation, initialize, solve, ConstraintMode, Family, SeedKind, SolverConfig,
};
use ldg_core::tensor::Params;

#[test]
fn penalty_matches_projection_at_small_epsilon() {
    let grid = Grid::build(48).unwrap();
    let fam = Family::Minus(0.5);
    let p = Params::new(10.0, 25.0, fam.obstacle()).unwrap();
    let mut cfg = SolverConfig::new(fam);
    cfg.grad_tol = 1e-3;
    cfg.max_iters = 60_000;
    let (proj, _) = solve(&cfg, &grid, &p).unwrap();
    cfg.constraint_mode = ConstraintMode::Penalty(0.01);
    let (pen, _) = solve(&cfg, &grid, &p).unwrap();
    let mut dist_sq = 0.0;
    for (i, j) in grid.mask_nodes() {
        let a = proj.at(&grid, i, j);
        let b = pen.at(&grid, i, j);
        dist_sq += FOUR_PI
            * grid.quad_weight(i, j)
            * ((a.u1 - b.u1).powi(2) + (a.u2 - b.u2).powi(2) + (a.u3 - b.u3).powi(2));
    }
    let dist = dist_sq.sqrt();
    assert!(dist < 0.1, "L2 distance {dist} exceeds 10 eps");
}

#[test]
fn warm_start_beats_cold_hedgehog() {
    let grid = Grid::build(48).unwrap();
    let fam = Family::Plus(-0.95);
    let mut cfg = SolverConfig::new(fam);
    cfg.grad_tol = 2e-3;
    cfg.max_iters = 60_000;
    let stages = continuation(&[10.0, 20.0], 25.0, &cfg, &grid).unwrap();
    // energy of the stage-1 warm start (already projected onto the
    // a = 20 constraints) vs the cold hedgehog at a = 20
    let p20 = Params::new(20.0, 25.0, fam.obstacle()).unwrap();
    let warm = initialize(&SeedKind::FromField(stages[0].field.clone()), &grid, &p20).unwrap();
    let cold = initialize(&SeedKind::Hedgehog, &grid, &p20).unwrap();
    let e_warm = energy(&warm, &grid, &p20).unwrap().total;
    let e_cold = energy(&cold, &grid, &p20).unwrap().total;
    assert!(
        e_warm <= e_cold,
        "warm start {e_warm} should not exceed cold hedgehog {e_cold}"
    );
}

#[test]
fn extended_field_has_reflection_symmetry() {
    let grid = Grid::build(32).unwrap();
    let fam = Family::Plus(-0.95);
    let p = Params::new(5.0, 12.5, fam.obstacle()).unwrap();
    let mut cfg = SolverConfig::new(fam);
    cfg.grad_tol = 1e-3;
    cfg.max_iters = 40_000;
    let (field, _) = solve(&cfg, &grid, &p).unwrap();
    for (rho, z) in [(0.3, 0.4), (0.5, 0.1), (0.1, 0.6)] {
        let up = sample(&field, &grid, rho, z);
        let down = sample(&field, &grid, rho, -z);
        assert_eq!(up.u1, down.u1);
        assert_eq!(up.u2, down.u2);
        assert_eq!(up.u3, -down.u3);
    }
}

#[test]
fn solve_is_deterministic() {
    let grid = Grid::build(24).unwrap();
    let fam = Family::Minus(0.95);
    let p = Params::new(5.0, 12.5, fam.obstacle()).unwrap();
    let mut cfg = SolverConfig::new(fam);
    cfg.grad_tol = 1e-3;
    cfg.max_iters = 20_000;
    cfg.seed = SeedKind::SplitSeed;
    let (f1, l1) = solve(&cfg, &grid, &p).unwrap();
    let (f2, l2) = solve(&cfg, &grid, &p).unwrap();
    assert_eq!(f1.data, f2.data);
    assert_eq!(l1.iterations, l2.iterations);
    assert_eq!(l1.rows.last().map(|r| r.total.to_bits()), l2.rows.last().map(|r| r.total.to_bits()));
}
