//! Obstacle-constrained energy minimization on the quarter disk.
//!
//! The two configuration families bound `u2` on the flat boundary from
//! below (plus family) or above (minus family). Minimization is
//! explicit projected gradient descent in the rho-weighted metric with
//! backtracking, plus a momentum extrapolation that is dropped
//! whenever it would break monotonicity, so accepted iterates are
//! always feasible and the objective is nonincreasing. The obstacle
//! can alternatively be enforced by a smooth boundary penalty.

use crate::energy::{self, EnergyBreakdown, EnergyError};
use crate::grid::{self, Grid, GridError, NodeTag, OrderField, FOUR_PI};
use crate::io;
use crate::tensor::{boundary_value, Obstacle, Params, TensorError, UVec};
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Shape(#[from] GridError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("seed file: {0}")]
    SeedFile(#[from] io::IoError),
    #[error("config family does not match params obstacle")]
    ConfigMismatch,
    #[error("energy became non-finite during descent")]
    NonFiniteField,
    #[error("backtracking underflowed (residual {residual:e} at iter {iter})")]
    NoDescent { iter: usize, residual: f64 },
    #[error("continuation schedule must be strictly increasing with >= 2 entries")]
    BadSchedule,
    #[error("continuation stage {index} failed: {source}")]
    Stage { index: usize, source: Box<SolverError> },
}

/// Which Signorini family to minimize in, with its level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Plus(f64),
    Minus(f64),
}

impl Family {
    pub fn obstacle(&self) -> Obstacle {
        match *self {
            Family::Plus(b) => Obstacle::PlusFamily(b),
            Family::Minus(c) => Obstacle::MinusFamily(c),
        }
    }

    pub fn validate(&self) -> Result<(), TensorError> {
        self.obstacle().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintMode {
    Projection,
    Penalty(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeedKind {
    Hedgehog,
    RingSeed,
    SplitSeed,
    FromFile(PathBuf),
    /// Warm start from an in-memory field (continuation stages).
    FromField(OrderField),
}

/// Backtracking line-search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub initial_step: f64,
    pub shrink: f64,
    pub grow: f64,
    pub armijo: f64,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            initial_step: 1.0,
            shrink: 0.5,
            grow: 1.5,
            armijo: 1e-4,
            min_step: 1e-14,
            max_step: 64.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub family: Family,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step: StepPolicy,
    pub constraint_mode: ConstraintMode,
    pub seed: SeedKind,
}

impl SolverConfig {
    pub fn new(family: Family) -> Self {
        SolverConfig {
            family,
            max_iters: 50_000,
            grad_tol: 1e-3,
            step: StepPolicy::default(),
            constraint_mode: ConstraintMode::Projection,
            seed: SeedKind::Hedgehog,
        }
    }
}

/// Smooth penalty pair (beta, B) for the boundary obstacle: beta is
/// nonpositive, nondecreasing, zero for s >= 0 and linear
/// eps + s/eps below -2 eps^2; the quadratic middle piece -s^2/(4 eps^3)
/// is the Hermite blend matching value and slope at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyFamily {
    pub epsilon: f64,
}

impl PenaltyFamily {
    pub fn new(epsilon: f64) -> Self {
        PenaltyFamily { epsilon }
    }

    pub fn beta(&self, s: f64) -> f64 {
        let e = self.epsilon;
        if s >= 0.0 {
            0.0
        } else if s <= -2.0 * e * e {
            e + s / e
        } else {
            -s * s / (4.0 * e.powi(3))
        }
    }

    /// B(t) = 2 int_0^t beta, nonnegative, zero for t >= 0.
    pub fn big_b(&self, t: f64) -> f64 {
        let e = self.epsilon;
        if t >= 0.0 {
            0.0
        } else if t <= -2.0 * e * e {
            t * t / e + 2.0 * e * t + 4.0 / 3.0 * e.powi(3)
        } else {
            -t.powi(3) / (6.0 * e.powi(3))
        }
    }
}

/// One accepted-iterate log row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub iter: usize,
    pub total: f64,
    pub dirichlet: f64,
    pub axis: f64,
    pub bulk: f64,
    pub grad_norm: f64,
}

impl LogRow {
    pub fn format(&self) -> String {
        format!(
            "{} {:.12e} {:.12e} {:.12e} {:.12e} {:.12e}",
            self.iter, self.total, self.dirichlet, self.axis, self.bulk, self.grad_norm
        )
    }
}

#[derive(Debug, Clone)]
pub struct SolveLog {
    pub rows: Vec<LogRow>,
    pub converged: bool,
    pub iterations: usize,
    pub final_energy: EnergyBreakdown,
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Build the starting field for a run.
pub fn initialize(seed: &SeedKind, grid: &Grid, params: &Params) -> Result<OrderField, SolverError> {
    let mut field = match seed {
        SeedKind::FromFile(path) => {
            let (_, file_grid, f) = io::read_field(path)?;
            if file_grid.n != grid.n {
                return Err(GridError::ShapeError { field: file_grid.n, grid: grid.n }.into());
            }
            f
        }
        SeedKind::FromField(f) => {
            if f.n != grid.n {
                return Err(GridError::ShapeError { field: f.n, grid: grid.n }.into());
            }
            f.clone()
        }
        _ => {
            let mut f = OrderField::zeros(grid);
            let core = (params.a * params.mu).sqrt();
            // sign-flip window around the origin for the biased seeds
            let r0 = 0.15;
            let r1 = 0.30;
            for (i, j) in grid.mask_nodes() {
                let rho = grid.rho(i);
                let z = grid.z(j);
                let r = (rho * rho + z * z).sqrt();
                let phi = rho.atan2(z);
                let amp = (core * r).tanh();
                let mut u = boundary_value(phi, params).scale(amp);
                let chi = smoothstep((r1 - r) / (r1 - r0));
                match seed {
                    SeedKind::RingSeed => {
                        u.u2 = (1.0 - chi) * u.u2 + chi * u.u2.abs();
                    }
                    SeedKind::SplitSeed => {
                        u.u2 = (1.0 - chi) * u.u2 - chi * u.u2.abs();
                    }
                    _ => {}
                }
                f.set(grid, i, j, u);
            }
            f
        }
    };
    project_in_place(&mut field, grid, params, true);
    Ok(field)
}

/// Pointwise feasibility operator: radial truncation to |u| <= H_a,
/// the boundary obstacle on u2 (when `with_obstacle`), then the hard
/// axis, equator and arc clamps.
fn project_in_place(field: &mut OrderField, grid: &Grid, params: &Params, with_obstacle: bool) {
    let h_a = params.h_a;
    let level = params.obstacle_threshold();
    let n = grid.n;
    for j in 0..=n {
        for i in 0..=n {
            if !grid.in_mask(i, j) {
                continue;
            }
            let id = grid.idx(i, j);
            let mut u = field.data[id];
            let norm = u.norm();
            // one-ulp slack keeps the rescaling idempotent in floats
            if norm > h_a * (1.0 + 1e-15) {
                u = u.scale(h_a / norm);
            }
            let arc = grid.tag(i, j) == NodeTag::ArcBoundary;
            if with_obstacle && j == 0 && !arc {
                match params.obstacle {
                    Obstacle::PlusFamily(_) => u.u2 = u.u2.max(level),
                    Obstacle::MinusFamily(_) => u.u2 = u.u2.min(level),
                }
            }
            if arc {
                let phi = grid.rho(i).atan2(grid.z(j));
                u = boundary_value(phi, params);
            } else {
                if i == 0 {
                    u.u1 = 0.0;
                    u.u3 = 0.0;
                }
                if j == 0 {
                    u.u3 = 0.0;
                }
            }
            field.data[id] = u;
        }
    }
}

/// Public projection onto the configuration space (always including
/// the obstacle). Idempotent.
pub fn project_constraints(
    field: &OrderField,
    grid: &Grid,
    config: &SolverConfig,
    params: &Params,
) -> Result<OrderField, SolverError> {
    if config.family.obstacle() != params.obstacle {
        return Err(SolverError::ConfigMismatch);
    }
    if field.n != grid.n {
        return Err(GridError::ShapeError { field: field.n, grid: grid.n }.into());
    }
    let mut out = field.clone();
    project_in_place(&mut out, grid, params, true);
    Ok(out)
}

/// Descent direction in the Euler-Lagrange normalization with the hard
/// constraints masked out.
fn el_direction(
    field: &OrderField,
    grid: &Grid,
    params: &Params,
    penalty: Option<&PenaltyFamily>,
) -> Vec<UVec> {
    let mut raw = energy::raw_gradient(field, grid, params);
    if let Some(pen) = penalty {
        let level = params.obstacle_threshold();
        let sign = match params.obstacle {
            Obstacle::PlusFamily(_) => 1.0,
            Obstacle::MinusFamily(_) => -1.0,
        };
        for i in 0..=grid.n {
            if !grid.in_mask(i, 0) || grid.tag(i, 0) == NodeTag::ArcBoundary {
                continue;
            }
            let id = grid.idx(i, 0);
            let s = sign * (field.data[id].u2 - level);
            raw[id].u2 += FOUR_PI * grid.radial_measure(i) * 2.0 * pen.beta(s) * sign;
        }
    }
    for (i, j) in grid.mask_nodes() {
        let id = grid.idx(i, j);
        if grid.tag(i, j) == NodeTag::ArcBoundary {
            raw[id] = UVec::ZERO;
            continue;
        }
        let scale = 1.0 / (2.0 * FOUR_PI * grid.quad_weight(i, j));
        let mut g = raw[id].scale(scale);
        if i == 0 {
            g.u1 = 0.0;
            g.u3 = 0.0;
        }
        if j == 0 {
            g.u3 = 0.0;
        }
        raw[id] = g;
    }
    raw
}

/// Max-norm of the descent direction with the active inequality
/// constraints projected out; vanishes exactly at constrained critical
/// points.
fn kkt_residual(
    field: &OrderField,
    dir: &[UVec],
    grid: &Grid,
    params: &Params,
    with_obstacle: bool,
) -> f64 {
    let atol = 1e-10 * params.h_a;
    let level = params.obstacle_threshold();
    let mut worst = 0.0f64;
    for (i, j) in grid.mask_nodes() {
        if grid.tag(i, j) == NodeTag::ArcBoundary {
            continue;
        }
        let id = grid.idx(i, j);
        let u = field.data[id];
        let mut d = dir[id];
        if with_obstacle && j == 0 {
            match params.obstacle {
                Obstacle::PlusFamily(_) => {
                    if u.u2 <= level + atol && d.u2 > 0.0 {
                        d.u2 = 0.0;
                    }
                }
                Obstacle::MinusFamily(_) => {
                    if u.u2 >= level - atol && d.u2 < 0.0 {
                        d.u2 = 0.0;
                    }
                }
            }
        }
        let norm = u.norm();
        if norm >= params.h_a - atol && norm > 0.0 {
            let radial = (d.u1 * u.u1 + d.u2 * u.u2 + d.u3 * u.u3) / norm;
            if radial < 0.0 {
                d.u1 -= radial * u.u1 / norm;
                d.u2 -= radial * u.u2 / norm;
                d.u3 -= radial * u.u3 / norm;
            }
        }
        worst = worst.max(d.u1.abs()).max(d.u2.abs()).max(d.u3.abs());
    }
    worst
}

fn objective(
    field: &OrderField,
    grid: &Grid,
    params: &Params,
    penalty: Option<&PenaltyFamily>,
) -> Result<(EnergyBreakdown, f64), SolverError> {
    let breakdown = energy::energy(field, grid, params)?;
    let mut pen_term = 0.0;
    if let Some(pen) = penalty {
        let level = params.obstacle_threshold();
        let sign = match params.obstacle {
            Obstacle::PlusFamily(_) => 1.0,
            Obstacle::MinusFamily(_) => -1.0,
        };
        for i in 0..=grid.n {
            if !grid.in_mask(i, 0) || grid.tag(i, 0) == NodeTag::ArcBoundary {
                continue;
            }
            let u2 = field.data[grid.idx(i, 0)].u2;
            pen_term += grid.radial_measure(i) * pen.big_b(sign * (u2 - level));
        }
        pen_term *= FOUR_PI;
    }
    Ok((breakdown, breakdown.total + pen_term))
}

/// Per-component diagonal curvature bound of the normalized energy
/// Hessian: stencil row sum, the 1/rho^2 masses, and a bulk bound.
/// Dividing the descent direction by it equalizes the stiff near-axis
/// components against the smooth interior ones.
fn el_diag(grid: &Grid, params: &Params) -> Vec<UVec> {
    let bulk = params.mu
        * (3.0 * crate::tensor::SQRT_2 * params.h_a
            + params.a * (3.0 * params.h_a * params.h_a - 1.0).abs());
    let mut out = vec![UVec::new(1.0, 1.0, 1.0); grid.node_count()];
    for (i, j) in grid.mask_nodes() {
        let id = grid.idx(i, j);
        let mut lap = 0.0;
        if grid.in_mask(i + 1, j) {
            lap += 2.0 * h_edge_row_coeff(grid, i, j);
        }
        if i > 0 && grid.in_mask(i - 1, j) {
            lap += 2.0 * h_edge_row_coeff(grid, i - 1, j);
        }
        if grid.in_mask(i, j + 1) {
            lap += 2.0 * v_edge_row_coeff(grid, i);
        }
        if j > 0 && grid.in_mask(i, j - 1) {
            lap += 2.0 * v_edge_row_coeff(grid, i);
        }
        let w = grid.quad_weight(i, j);
        let rho = grid.rho(i);
        let inv_r2 = if rho > 0.0 { 1.0 / (rho * rho) } else { 0.0 };
        let base = lap / (2.0 * w) + 0.5 * bulk;
        out[id] = UVec::new(
            (base + 4.0 * inv_r2).max(1.0),
            base.max(1.0),
            (base + inv_r2).max(1.0),
        );
    }
    out
}

fn h_edge_row_coeff(grid: &Grid, i: usize, j: usize) -> f64 {
    let rho_mid = (i as f64 + 0.5) * grid.h;
    let t = if j == 0 { 0.5 } else { 1.0 };
    rho_mid * t / (grid.h * grid.h)
}

fn v_edge_row_coeff(grid: &Grid, i: usize) -> f64 {
    grid.radial_measure(i) / (grid.h * grid.h * grid.h)
}

/// Weighted squared distance between two fields in the discrete
/// L2(rho) metric over the ball.
fn dist_sq_weighted(a: &OrderField, b: &OrderField, grid: &Grid) -> f64 {
    let mut acc = 0.0;
    for (i, j) in grid.mask_nodes() {
        let id = grid.idx(i, j);
        let da = a.data[id];
        let db = b.data[id];
        let d1 = da.u1 - db.u1;
        let d2 = da.u2 - db.u2;
        let d3 = da.u3 - db.u3;
        acc += FOUR_PI * grid.quad_weight(i, j) * (d1 * d1 + d2 * d2 + d3 * d3);
    }
    acc
}

fn stepped(y: &OrderField, dir: &[UVec], diag: &[UVec], t: f64, grid: &Grid) -> OrderField {
    let mut out = y.clone();
    for (i, j) in grid.mask_nodes() {
        let id = grid.idx(i, j);
        let d = dir[id];
        let m = diag[id];
        let u = out.data[id];
        out.data[id] = UVec::new(
            u.u1 - t * d.u1 / m.u1,
            u.u2 - t * d.u2 / m.u2,
            u.u3 - t * d.u3 / m.u3,
        );
    }
    out
}

/// Minimize the (possibly penalized) energy from the configured seed.
/// The returned field is feasible; `log.converged` records whether the
/// residual tolerance was met within the iteration budget.
pub fn solve(
    config: &SolverConfig,
    grid: &Grid,
    params: &Params,
) -> Result<(OrderField, SolveLog), SolverError> {
    config.family.validate()?;
    if config.family.obstacle() != params.obstacle {
        return Err(SolverError::ConfigMismatch);
    }
    let penalty = match config.constraint_mode {
        ConstraintMode::Projection => None,
        ConstraintMode::Penalty(eps) => Some(PenaltyFamily::new(eps)),
    };
    let with_obstacle = penalty.is_none();

    let mut u = initialize(&config.seed, grid, params)?;
    project_in_place(&mut u, grid, params, with_obstacle);
    let (mut breakdown, mut obj) = objective(&u, grid, params, penalty.as_ref())?;

    let mut u_prev = u.clone();
    let diag = el_diag(grid, params);
    let mut t = config.step.initial_step;
    let mut theta_prev: f64 = 1.0;
    let mut rows = Vec::new();

    for iter in 0..config.max_iters {
        let dir_u = el_direction(&u, grid, params, penalty.as_ref());
        let res = kkt_residual(&u, &dir_u, grid, params, with_obstacle);
        rows.push(LogRow {
            iter,
            total: obj,
            dirichlet: breakdown.dirichlet,
            axis: breakdown.axis_penalty,
            bulk: breakdown.bulk,
            grad_norm: res,
        });
        if !obj.is_finite() {
            return Err(SolverError::NonFiniteField);
        }
        if res < config.grad_tol {
            return Ok((
                u,
                SolveLog { rows, converged: true, iterations: iter, final_energy: breakdown },
            ));
        }

        let theta_cur = 0.5 * (1.0 + (1.0 + 4.0 * theta_prev * theta_prev).sqrt());
        let beta = (theta_prev - 1.0) / theta_cur;
        let armijo = config.step.armijo;
        let accept_test = move |obj_ref: f64, obj_cand: f64, dist_sq: f64, t: f64| -> bool {
            let decrease = armijo / t * dist_sq;
            let tiny = 1e-14 * obj_ref.abs().max(1.0);
            obj_cand <= obj_ref - decrease || (obj_cand <= obj_ref && decrease <= tiny)
        };

        // momentum extrapolation; dropped, not backtracked, when it
        // would break monotonicity
        let mut accepted = false;
        if beta > 0.0 {
            let mut y = u.clone();
            for (i, j) in grid.mask_nodes() {
                let id = grid.idx(i, j);
                let a = u.data[id];
                let b = u_prev.data[id];
                y.data[id] = UVec::new(
                    a.u1 + beta * (a.u1 - b.u1),
                    a.u2 + beta * (a.u2 - b.u2),
                    a.u3 + beta * (a.u3 - b.u3),
                );
            }
            project_in_place(&mut y, grid, params, with_obstacle);
            let dir = el_direction(&y, grid, params, penalty.as_ref());
            let mut cand = stepped(&y, &dir, &diag, t, grid);
            project_in_place(&mut cand, grid, params, with_obstacle);
            match objective(&cand, grid, params, penalty.as_ref()) {
                Ok((bd_cand, obj_cand)) => {
                    if accept_test(obj, obj_cand, dist_sq_weighted(&cand, &y, grid), t) {
                        // gradient restart: drop the momentum sequence
                        // when the step turns against the gradient at y
                        let mut against = 0.0;
                        for (i, j) in grid.mask_nodes() {
                            let id = grid.idx(i, j);
                            let d = dir[id];
                            let step_vec = (
                                cand.data[id].u1 - u.data[id].u1,
                                cand.data[id].u2 - u.data[id].u2,
                                cand.data[id].u3 - u.data[id].u3,
                            );
                            against += d.u1 * step_vec.0 + d.u2 * step_vec.1 + d.u3 * step_vec.2;
                        }
                        u_prev = u;
                        u = cand;
                        breakdown = bd_cand;
                        obj = obj_cand;
                        t = (t * config.step.grow).min(config.step.max_step);
                        theta_prev = if against > 0.0 { 1.0 } else { theta_cur };
                        accepted = true;
                    }
                }
                Err(SolverError::Energy(EnergyError::NonFiniteField)) => {}
                Err(e) => return Err(e),
            }
            if !accepted {
                theta_prev = 1.0;
            }
        }

        // plain projected step with backtracking on the step size
        let mut backtracks = 0usize;
        while !accepted {
            let mut cand = stepped(&u, &dir_u, &diag, t, grid);
            project_in_place(&mut cand, grid, params, with_obstacle);
            match objective(&cand, grid, params, penalty.as_ref()) {
                Ok((bd_cand, obj_cand)) => {
                    if accept_test(obj, obj_cand, dist_sq_weighted(&cand, &u, grid), t) {
                        u_prev = u;
                        u = cand;
                        breakdown = bd_cand;
                        obj = obj_cand;
                        t = (t * config.step.grow).min(config.step.max_step);
                        if beta <= 0.0 {
                            theta_prev = theta_cur;
                        }
                        accepted = true;
                        continue;
                    }
                }
                Err(SolverError::Energy(EnergyError::NonFiniteField)) => {}
                Err(e) => return Err(e),
            }
            t *= config.step.shrink;
            backtracks += 1;
            if t < config.step.min_step || backtracks > 200 {
                return Err(SolverError::NoDescent { iter, residual: res });
            }
        }
    }
    Ok((
        u,
        SolveLog {
            rows,
            converged: false,
            iterations: config.max_iters,
            final_energy: breakdown,
        },
    ))
}

/// One continuation stage result.
#[derive(Debug, Clone)]
pub struct ContinuationStage {
    pub a: f64,
    pub field: OrderField,
    pub log: SolveLog,
    /// int a (|u|^2 - 1)^2 over the ball; decays along the schedule as
    /// the potential well sharpens.
    pub potential_integral: f64,
}

/// Solve along an increasing temperature schedule at fixed mu,
/// warm-starting each stage from the previous solution.
pub fn continuation(
    a_schedule: &[f64],
    mu: f64,
    config: &SolverConfig,
    grid: &Grid,
) -> Result<Vec<ContinuationStage>, SolverError> {
    if a_schedule.len() < 2 || a_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SolverError::BadSchedule);
    }
    let mut stages: Vec<ContinuationStage> = Vec::with_capacity(a_schedule.len());
    for (k, &a) in a_schedule.iter().enumerate() {
        let params = Params::new(a, mu, config.family.obstacle())
            .map_err(|e| SolverError::Stage { index: k, source: Box::new(e.into()) })?;
        let mut stage_cfg = config.clone();
        if k > 0 {
            stage_cfg.seed = SeedKind::FromField(stages[k - 1].field.clone());
        }
        let (field, log) = solve(&stage_cfg, grid, &params)
            .map_err(|e| SolverError::Stage { index: k, source: Box::new(e) })?;
        let mut dens = vec![0.0; grid.node_count()];
        for (i, j) in grid.mask_nodes() {
            let dev = field.at(grid, i, j).norm_sq() - 1.0;
            dens[grid.idx(i, j)] = a * dev * dev;
        }
        let potential_integral = grid::integrate(&dens, grid)
            .map_err(|e| SolverError::Stage { index: k, source: Box::new(e.into()) })?;
        stages.push(ContinuationStage { a, field, log, potential_integral });
    }
    Ok(stages)
}

/// Largest obstacle violation on the flat boundary; zero for feasible
/// fields, used to track the penalty-mode constraint error.
pub fn obstacle_violation(field: &OrderField, grid: &Grid, params: &Params) -> f64 {
    let level = params.obstacle_threshold();
    let mut worst = 0.0f64;
    for i in 0..=grid.n {
        if !grid.in_mask(i, 0) || grid.tag(i, 0) == NodeTag::ArcBoundary {
            continue;
        }
        let u2 = field.at(grid, i, 0).u2;
        let v = match params.obstacle {
            Obstacle::PlusFamily(_) => level - u2,
            Obstacle::MinusFamily(_) => u2 - level,
        };
        worst = worst.max(v);
    }
    worst
}
