//! Discrete energy of a field on the quarter-disk grid.
//!
//! The reported numbers are full three-dimensional energies over the
//! unit ball: the azimuthal revolution and the equatorial reflection
//! contribute the explicit 4 pi prefactor. The Dirichlet part is an
//! edge-based sum, so differentiating the discrete energy node by node
//! gives an exact descent direction for the solver.

use crate::grid::{self, Grid, GridError, NodeTag, OrderField, FOUR_PI};
use crate::tensor::{p_gradient, p_invariant, Params, UVec, SQRT_2};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("field contains non-finite values")]
    NonFiniteField,
    #[error("field is not sphere-valued: max |u|-1 deviation {0:e}")]
    NotSphereValued(f64),
    #[error("axis regularity violated: |u1| + |u3| = {0:e} on the axis")]
    AxisConstraintViolated(f64),
    #[error("unsupported localization center: {0}")]
    UnsupportedCenter(String),
    #[error(transparent)]
    Shape(#[from] GridError),
}

/// Energy split into its three nonnegative pieces, all scaled by 4 pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub axis_penalty: f64,
    pub bulk: f64,
    pub total: f64,
}

#[inline]
fn diff_sq(a: UVec, b: UVec) -> f64 {
    let d1 = a.u1 - b.u1;
    let d2 = a.u2 - b.u2;
    let d3 = a.u3 - b.u3;
    d1 * d1 + d2 * d2 + d3 * d3
}

/// Weight of the horizontal edge (i,j)-(i+1,j), divided by h^2.
#[inline]
fn h_edge_coeff(grid: &Grid, i: usize, j: usize) -> f64 {
    let rho_mid = (i as f64 + 0.5) * grid.h;
    let t = if j == 0 { 0.5 } else { 1.0 };
    rho_mid * t
}

/// Weight of the vertical edge (i,j)-(i,j+1), divided by h^2.
#[inline]
fn v_edge_coeff(grid: &Grid, i: usize) -> f64 {
    grid.radial_measure(i) / grid.h
}

#[inline]
fn bulk_density(u: UVec, params: &Params) -> f64 {
    let dev = u.norm_sq() - 1.0;
    params.mu
        * (params.d_a - 3.0 * SQRT_2 * p_invariant(u) + 0.5 * params.a * dev * dev)
}

/// Axis-penalty density (4 u1^2 + u3^2)/rho^2. Zero by convention on
/// the axis itself, where the hard constraints u1 = u3 = 0 keep the
/// continuum limit finite; the corner node at the origin is zeroed the
/// same way.
#[inline]
fn axis_density(u: UVec, rho: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else {
        (4.0 * u.u1 * u.u1 + u.u3 * u.u3) / (rho * rho)
    }
}

/// Total energy with its breakdown.
pub fn energy(
    field: &OrderField,
    grid: &Grid,
    params: &Params,
) -> Result<EnergyBreakdown, EnergyError> {
    if field.n != grid.n {
        return Err(GridError::ShapeError { field: field.n, grid: grid.n }.into());
    }
    if !field.is_finite() {
        return Err(EnergyError::NonFiniteField);
    }
    let n = grid.n;
    // row partials computed in parallel, reduced in index order so the
    // result is bit-stable across thread counts
    let rows: Vec<[f64; 3]> = (0..=n)
        .into_par_iter()
        .map(|j| {
            let mut dir = 0.0;
            let mut axis = 0.0;
            let mut bulk = 0.0;
            for i in 0..=n {
                if !grid.in_mask(i, j) {
                    continue;
                }
                let u = field.at(grid, i, j);
                if grid.in_mask(i + 1, j) {
                    dir += h_edge_coeff(grid, i, j) * diff_sq(u, field.at(grid, i + 1, j));
                }
                if grid.in_mask(i, j + 1) {
                    dir += v_edge_coeff(grid, i) * diff_sq(u, field.at(grid, i, j + 1));
                }
                let w = grid.quad_weight(i, j);
                axis += w * axis_density(u, grid.rho(i));
                bulk += w * bulk_density(u, params);
            }
            [dir, axis, bulk]
        })
        .collect();
    let mut sums = [0.0f64; 3];
    for r in rows {
        sums[0] += r[0];
        sums[1] += r[1];
        sums[2] += r[2];
    }
    let dirichlet = FOUR_PI * sums[0];
    let axis_penalty = FOUR_PI * sums[1];
    let bulk = FOUR_PI * sums[2];
    Ok(EnergyBreakdown { dirichlet, axis_penalty, bulk, total: dirichlet + axis_penalty + bulk })
}

/// Raw partial derivatives dE/du of the discrete energy with respect
/// to every nodal value, no constraint masking. Used by the solver and
/// by the finite-difference consistency tests.
pub(crate) fn raw_gradient(field: &OrderField, grid: &Grid, params: &Params) -> Vec<UVec> {
    let n = grid.n;
    (0..=n)
        .into_par_iter()
        .flat_map_iter(|j| {
            let field = &field;
            (0..=n).map(move |i| {
                if !grid.in_mask(i, j) {
                    return UVec::ZERO;
                }
                let u = field.at(grid, i, j);
                let mut g = UVec::ZERO;
                // incident edges, coefficients recomputed symmetrically
                let mut add_edge = |w_over_h2: f64, nb: UVec| {
                    let c = 2.0 * w_over_h2;
                    g.u1 += c * (u.u1 - nb.u1);
                    g.u2 += c * (u.u2 - nb.u2);
                    g.u3 += c * (u.u3 - nb.u3);
                };
                if grid.in_mask(i + 1, j) {
                    add_edge(h_edge_coeff(grid, i, j), field.at(grid, i + 1, j));
                }
                if i > 0 && grid.in_mask(i - 1, j) {
                    add_edge(h_edge_coeff(grid, i - 1, j), field.at(grid, i - 1, j));
                }
                if grid.in_mask(i, j + 1) {
                    add_edge(v_edge_coeff(grid, i), field.at(grid, i, j + 1));
                }
                if j > 0 && grid.in_mask(i, j - 1) {
                    add_edge(v_edge_coeff(grid, i), field.at(grid, i, j - 1));
                }
                let w = grid.quad_weight(i, j);
                let rho = grid.rho(i);
                if rho > 0.0 {
                    let inv_r2 = 1.0 / (rho * rho);
                    g.u1 += w * 8.0 * u.u1 * inv_r2;
                    g.u3 += w * 2.0 * u.u3 * inv_r2;
                }
                let pg = p_gradient(u);
                let dev = u.norm_sq() - 1.0;
                let c_pot = params.mu * 2.0 * params.a * dev;
                let c_p = -params.mu * 3.0 * SQRT_2;
                g.u1 += w * (c_p * pg.u1 + c_pot * u.u1);
                g.u2 += w * (c_p * pg.u2 + c_pot * u.u2);
                g.u3 += w * (c_p * pg.u3 + c_pot * u.u3);
                g.scale(FOUR_PI)
            })
        })
        .collect()
}

/// Discrete L2(rho d rho dz) gradient of the energy in the
/// Euler-Lagrange normalization: half the Frechet derivative of the
/// density, so a vanishing value at the free nodes characterizes a
/// discrete critical point of the continuum system. Hard-constrained
/// components (arc nodes, u1/u3 on the axis, u3 on the equator) are
/// reported as zero.
pub fn energy_gradient(
    field: &OrderField,
    grid: &Grid,
    params: &Params,
) -> Result<Vec<UVec>, EnergyError> {
    if field.n != grid.n {
        return Err(GridError::ShapeError { field: field.n, grid: grid.n }.into());
    }
    if !field.is_finite() {
        return Err(EnergyError::NonFiniteField);
    }
    let mut raw = raw_gradient(field, grid, params);
    for (i, j) in grid.mask_nodes() {
        let id = grid.idx(i, j);
        let w = grid.quad_weight(i, j);
        let scale = 1.0 / (2.0 * FOUR_PI * w);
        let mut g = raw[id].scale(scale);
        match grid.tag(i, j) {
            NodeTag::ArcBoundary => g = UVec::ZERO,
            NodeTag::AxisSegment => {
                g.u1 = 0.0;
                g.u3 = 0.0;
            }
            NodeTag::EquatorT => g.u3 = 0.0,
            NodeTag::Interior => {}
        }
        raw[id] = g;
    }
    Ok(raw)
}

/// Energy of a sphere-valued field in the low-temperature limit:
/// 4 pi int [ |Du|^2 + (4u1^2+u3^2)/rho^2 + sqrt(2) mu (1 - 3 P[u]) ] rho.
pub fn limit_energy(field: &OrderField, grid: &Grid, mu: f64) -> Result<f64, EnergyError> {
    if field.n != grid.n {
        return Err(GridError::ShapeError { field: field.n, grid: grid.n }.into());
    }
    let mut worst = 0.0f64;
    let mut axis_dev = 0.0f64;
    for (i, j) in grid.mask_nodes() {
        let u = field.at(grid, i, j);
        worst = worst.max((u.norm() - 1.0).abs());
        if i == 0 {
            axis_dev = axis_dev.max(u.u1.abs() + u.u3.abs());
        }
    }
    if worst > 1e-8 {
        return Err(EnergyError::NotSphereValued(worst));
    }
    // the 1/rho^2 terms only stay integrable when u1, u3 vanish on the
    // axis; a violation means the field is outside the configuration
    // space entirely
    if axis_dev > 1e-12 {
        return Err(EnergyError::AxisConstraintViolated(axis_dev));
    }
    let n = grid.n;
    let mut total = 0.0;
    for j in 0..=n {
        let mut row = 0.0;
        for i in 0..=n {
            if !grid.in_mask(i, j) {
                continue;
            }
            let u = field.at(grid, i, j);
            if grid.in_mask(i + 1, j) {
                row += h_edge_coeff(grid, i, j) * diff_sq(u, field.at(grid, i + 1, j));
            }
            if grid.in_mask(i, j + 1) {
                row += v_edge_coeff(grid, i) * diff_sq(u, field.at(grid, i, j + 1));
            }
            let w = grid.quad_weight(i, j);
            row += w * axis_density(u, grid.rho(i));
            row += w * SQRT_2 * mu * (1.0 - 3.0 * p_invariant(u));
        }
        total += row;
    }
    Ok(FOUR_PI * total)
}

/// Nodal energy density f_{a,mu} of the lifted field, from central
/// differences. Used for localized-energy diagnostics.
pub fn density_field(
    field: &OrderField,
    grid: &Grid,
    params: &Params,
) -> Result<Vec<f64>, EnergyError> {
    let grads = grid::gradient(field, grid)?;
    let mut out = vec![0.0; grid.node_count()];
    for (i, j) in grid.mask_nodes() {
        let id = grid.idx(i, j);
        let u = field.at(grid, i, j);
        let g = grads[id];
        let dir: f64 = g.iter().map(|c| c[0] * c[0] + c[1] * c[1]).sum();
        out[id] = dir + axis_density(u, grid.rho(i)) + bulk_density(u, params);
    }
    Ok(out)
}

/// Scaled localized energy r^-1 int_{B_r(y) cap B_1} f_{a,mu} for a
/// center y on the symmetry axis (interior version) or at the north
/// pole (boundary version). Off-axis centers revolve into
/// non-axisymmetric balls and are rejected.
pub fn localized_energy(
    field: &OrderField,
    grid: &Grid,
    params: &Params,
    center: (f64, f64),
    r: f64,
) -> Result<f64, EnergyError> {
    let (c_rho, c_z) = center;
    if c_rho != 0.0 {
        return Err(EnergyError::UnsupportedCenter(format!(
            "center rho = {c_rho}, only axis and pole centers revolve symmetrically"
        )));
    }
    if !(r > 0.0) {
        return Err(EnergyError::UnsupportedCenter(format!("radius {r} must be positive")));
    }
    let boundary = (c_z - 1.0).abs() < 1e-12;
    if !boundary && c_z.abs() + r > 1.0 + 1e-12 {
        return Err(EnergyError::UnsupportedCenter(format!(
            "ball of radius {r} at z = {c_z} is not contained in the unit ball"
        )));
    }
    let dens = density_field(field, grid, params)?;
    let r_sq = r * r;
    let mut total = 0.0;
    for (i, j) in grid.mask_nodes() {
        let id = grid.idx(i, j);
        let rho = grid.rho(i);
        let z = grid.z(j);
        let mut hits = 0.0;
        if rho * rho + (z - c_z).powi(2) < r_sq {
            hits += 1.0;
        }
        if rho * rho + (z + c_z).powi(2) < r_sq {
            hits += 1.0;
        }
        if hits > 0.0 {
            // quad_weight halves the equator row; the mirror indicator
            // restores full measure there
            total += 0.5 * FOUR_PI * grid.quad_weight(i, j) * hits * dens[id];
        }
    }
    Ok(total / r)
}
