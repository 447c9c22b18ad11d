//! Uniform finite-difference grid on the quarter disk
//! { (rho, z) : rho >= 0, z >= 0, rho^2 + z^2 <= 1 }, with boundary
//! tags, symmetry ghosts and a rho-weighted quadrature that reproduces
//! integrals over the unit ball for axially symmetric densities.

use crate::tensor::UVec;
use thiserror::Error;

pub const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("resolution {0} too coarse, need n >= 16")]
    ResolutionTooCoarse(usize),
    #[error("field/grid shape mismatch: field n = {field}, grid n = {grid}")]
    ShapeError { field: usize, grid: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    Interior,
    /// Dirichlet band along the circular arc, |rho^2 + z^2 - 1| <= h.
    ArcBoundary,
    /// Symmetry axis rho = 0 (includes the corner at the origin).
    AxisSegment,
    /// Flat boundary z = 0, rho > 0.
    EquatorT,
}

/// Immutable grid: node coordinates, inside-disk mask, tags, and the
/// per-node quadrature weight (quarter-disk measure, before the 4 pi
/// revolution/reflection factor).
#[derive(Debug, Clone)]
pub struct Grid {
    pub n: usize,
    pub h: f64,
    mask: Vec<bool>,
    tags: Vec<NodeTag>,
    weights: Vec<f64>,
    col_height: Vec<usize>,
}

impl Grid {
    pub fn build(n: usize) -> Result<Grid, GridError> {
        if n < 16 {
            return Err(GridError::ResolutionTooCoarse(n));
        }
        let h = 1.0 / n as f64;
        let nn = (n + 1) * (n + 1);
        let mut mask = vec![false; nn];
        let mut tags = vec![NodeTag::Interior; nn];
        let mut weights = vec![0.0; nn];
        let mut col_height = vec![0usize; n + 1];

        for i in 0..=n {
            let rho = i as f64 * h;
            let z_max_sq = 1.0 - rho * rho;
            let z_max = if z_max_sq > 0.0 { z_max_sq.sqrt() } else { 0.0 };
            // tallest node index with z_j <= z_max, robust to roundoff
            let mut jt = ((z_max / h) + 1e-12).floor() as usize;
            if jt > n {
                jt = n;
            }
            col_height[i] = jt;
            // radial cell measure: int rho d rho over the node's cell
            let m_i = if i == 0 {
                h * h / 8.0
            } else if i == n {
                0.5 * h * (1.0 - 0.25 * h)
            } else {
                h * rho
            };
            for j in 0..=jt {
                let id = j * (n + 1) + i;
                mask[id] = true;
                let z = j as f64 * h;
                let r_sq = rho * rho + z * z;
                tags[id] = if r_sq >= 1.0 - h {
                    NodeTag::ArcBoundary
                } else if i == 0 {
                    NodeTag::AxisSegment
                } else if j == 0 {
                    NodeTag::EquatorT
                } else {
                    NodeTag::Interior
                };
                // column trapezoid with a cut correction at the arc
                let t = if jt == 0 {
                    z_max / h
                } else if j == 0 {
                    0.5
                } else if j == jt {
                    0.5 + (z_max - jt as f64 * h) / h
                } else {
                    1.0
                };
                weights[id] = m_i * h * t;
            }
        }
        Ok(Grid { n, h, mask, tags, weights, col_height })
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    #[inline]
    pub fn rho(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    #[inline]
    pub fn in_mask(&self, i: usize, j: usize) -> bool {
        i <= self.n && j <= self.n && self.mask[self.idx(i, j)]
    }

    #[inline]
    pub fn tag(&self, i: usize, j: usize) -> NodeTag {
        self.tags[self.idx(i, j)]
    }

    /// Quarter-disk quadrature weight of a node (without the 4 pi
    /// factor); zero outside the mask.
    #[inline]
    pub fn quad_weight(&self, i: usize, j: usize) -> f64 {
        self.weights[self.idx(i, j)]
    }

    /// Tallest in-mask node index of column `i`.
    #[inline]
    pub fn column_height(&self, i: usize) -> usize {
        self.col_height[i]
    }

    /// Radial cell measure of column `i`: the integral of rho over the
    /// node's rho-cell. Positive for every column, including the axis.
    #[inline]
    pub fn radial_measure(&self, i: usize) -> f64 {
        if i == 0 {
            self.h * self.h / 8.0
        } else if i == self.n {
            0.5 * self.h * (1.0 - 0.25 * self.h)
        } else {
            self.h * self.rho(i)
        }
    }

    pub fn node_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn mask_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Iterate over in-mask nodes as (i, j).
    pub fn mask_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.n).flat_map(move |j| {
            (0..=self.n)
                .filter(move |&i| self.mask[j * (self.n + 1) + i])
                .map(move |i| (i, j))
        })
    }

    fn check_shape(&self, field: &OrderField) -> Result<(), GridError> {
        if field.n != self.n {
            return Err(GridError::ShapeError { field: field.n, grid: self.n });
        }
        Ok(())
    }
}

/// Three-component field on the quarter-disk lattice. Values outside
/// the mask are kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderField {
    pub n: usize,
    pub data: Vec<UVec>,
}

impl OrderField {
    pub fn zeros(grid: &Grid) -> Self {
        OrderField { n: grid.n, data: vec![UVec::ZERO; grid.node_count()] }
    }

    #[inline]
    pub fn at(&self, grid: &Grid, i: usize, j: usize) -> UVec {
        self.data[grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, grid: &Grid, i: usize, j: usize, v: UVec) {
        let id = grid.idx(i, j);
        self.data[id] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|u| u.is_finite())
    }

    /// Max norm of the component-wise difference with `other`.
    pub fn max_diff(&self, other: &OrderField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| {
                m.max((a.u1 - b.u1).abs())
                    .max((a.u2 - b.u2).abs())
                    .max((a.u3 - b.u3).abs())
            })
    }
}

/// Per-node first derivatives [[d/d rho, d/dz]; 3 components].
pub type NodeGradient = [[f64; 2]; 3];

#[inline]
fn comp(u: UVec, c: usize) -> f64 {
    match c {
        0 => u.u1,
        1 => u.u2,
        _ => u.u3,
    }
}

/// Ghost value across the axis (rho < 0): u1, u3 odd, u2 even.
#[inline]
fn axis_ghost(u: UVec) -> UVec {
    UVec::new(-u.u1, u.u2, -u.u3)
}

/// Ghost value across the equator (z < 0): u1, u2 even, u3 odd.
#[inline]
fn equator_ghost(u: UVec) -> UVec {
    UVec::new(u.u1, u.u2, -u.u3)
}

/// First derivatives of the field: central differences with symmetry
/// ghosts across the axis and the equator, one-sided at the arc.
pub fn gradient(field: &OrderField, grid: &Grid) -> Result<Vec<NodeGradient>, GridError> {
    grid.check_shape(field)?;
    let n = grid.n;
    let inv2h = 0.5 / grid.h;
    let invh = 1.0 / grid.h;
    let mut out = vec![[[0.0; 2]; 3]; grid.node_count()];
    for j in 0..=n {
        for i in 0..=n {
            if !grid.in_mask(i, j) {
                continue;
            }
            let here = field.at(grid, i, j);
            // d/d rho; the axis ghost mirrors the first off-axis node
            let left = if i == 0 {
                if grid.in_mask(1, j) {
                    Some(axis_ghost(field.at(grid, 1, j)))
                } else {
                    None
                }
            } else if grid.in_mask(i - 1, j) {
                Some(field.at(grid, i - 1, j))
            } else {
                None
            };
            let right = if i + 1 <= n && grid.in_mask(i + 1, j) {
                Some(field.at(grid, i + 1, j))
            } else {
                None
            };
            let drho = match (left, right) {
                (Some(l), Some(r)) => [
                    (r.u1 - l.u1) * inv2h,
                    (r.u2 - l.u2) * inv2h,
                    (r.u3 - l.u3) * inv2h,
                ],
                (Some(l), None) => [
                    (here.u1 - l.u1) * invh,
                    (here.u2 - l.u2) * invh,
                    (here.u3 - l.u3) * invh,
                ],
                (None, Some(r)) => [
                    (r.u1 - here.u1) * invh,
                    (r.u2 - here.u2) * invh,
                    (r.u3 - here.u3) * invh,
                ],
                (None, None) => [0.0; 3],
            };
            // d/dz; the equator ghost reflects the first row above T
            let down = if j == 0 {
                if grid.in_mask(i, 1) {
                    Some(equator_ghost(field.at(grid, i, 1)))
                } else {
                    None
                }
            } else if grid.in_mask(i, j - 1) {
                Some(field.at(grid, i, j - 1))
            } else {
                None
            };
            let up = if j + 1 <= n && grid.in_mask(i, j + 1) {
                Some(field.at(grid, i, j + 1))
            } else {
                None
            };
            let dz = match (down, up) {
                (Some(l), Some(r)) => [
                    (r.u1 - l.u1) * inv2h,
                    (r.u2 - l.u2) * inv2h,
                    (r.u3 - l.u3) * inv2h,
                ],
                (Some(l), None) => [
                    (here.u1 - l.u1) * invh,
                    (here.u2 - l.u2) * invh,
                    (here.u3 - l.u3) * invh,
                ],
                (None, Some(r)) => [
                    (r.u1 - here.u1) * invh,
                    (r.u2 - here.u2) * invh,
                    (r.u3 - here.u3) * invh,
                ],
                (None, None) => [0.0; 3],
            };
            let id = grid.idx(i, j);
            for c in 0..3 {
                out[id][c] = [drho[c], dz[c]];
            }
        }
    }
    Ok(out)
}

/// Integral of an axially symmetric scalar density over the unit ball:
/// 4 pi times the rho-weighted quarter-disk sum.
pub fn integrate(density: &[f64], grid: &Grid) -> Result<f64, GridError> {
    if density.len() != grid.node_count() {
        return Err(GridError::ShapeError { field: density.len(), grid: grid.node_count() });
    }
    let mut total = 0.0;
    for j in 0..=grid.n {
        let mut row = 0.0;
        for i in 0..=grid.n {
            let id = grid.idx(i, j);
            if grid.mask[id] {
                row += grid.weights[id] * density[id];
            }
        }
        total += row;
    }
    Ok(FOUR_PI * total)
}

/// Samples of the field on the flat boundary, ordered by rho.
pub fn restrict_to_t(field: &OrderField, grid: &Grid) -> Result<Vec<(f64, UVec)>, GridError> {
    grid.check_shape(field)?;
    Ok((0..=grid.n)
        .filter(|&i| grid.in_mask(i, 0))
        .map(|i| (grid.rho(i), field.at(grid, i, 0)))
        .collect())
}

/// Bilinear sample at an arbitrary point of the half-plane; z < 0 is
/// reached through the equatorial symmetry, rho < 0 through the axis
/// symmetry. Out-of-disk corners clamp to the nearest in-mask value.
pub fn sample(field: &OrderField, grid: &Grid, rho: f64, z: f64) -> UVec {
    let (rho, z, flip_eq, flip_ax) = {
        let mut r = rho;
        let mut zz = z;
        let mut fe = false;
        let mut fa = false;
        if zz < 0.0 {
            zz = -zz;
            fe = true;
        }
        if r < 0.0 {
            r = -r;
            fa = true;
        }
        (r, zz, fe, fa)
    };
    let n = grid.n;
    let fi = (rho / grid.h).min(n as f64 - 1e-9).max(0.0);
    let fj = (z / grid.h).min(n as f64 - 1e-9).max(0.0);
    let i0 = fi.floor() as usize;
    let j0 = fj.floor() as usize;
    let tx = fi - i0 as f64;
    let ty = fj - j0 as f64;
    let fetch = |i: usize, j: usize| -> UVec {
        if grid.in_mask(i, j) {
            field.at(grid, i, j)
        } else if grid.in_mask(i, j.saturating_sub(1)) {
            field.at(grid, i, j.saturating_sub(1))
        } else if i > 0 && grid.in_mask(i - 1, j) {
            field.at(grid, i - 1, j)
        } else {
            UVec::ZERO
        }
    };
    let f00 = fetch(i0, j0);
    let f10 = fetch(i0 + 1, j0);
    let f01 = fetch(i0, j0 + 1);
    let f11 = fetch(i0 + 1, j0 + 1);
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let blend = |c: usize| {
        lerp(
            lerp(comp(f00, c), comp(f10, c), tx),
            lerp(comp(f01, c), comp(f11, c), tx),
            ty,
        )
    };
    let mut v = UVec::new(blend(0), blend(1), blend(2));
    if flip_eq {
        v.u3 = -v.u3;
    }
    if flip_ax {
        v.u1 = -v.u1;
        v.u3 = -v.u3;
    }
    v
}

/// Bilinear prolongation of a field onto a finer grid (warm starts).
pub fn prolong(field: &OrderField, coarse: &Grid, fine: &Grid) -> Result<OrderField, GridError> {
    coarse.check_shape(field)?;
    let mut out = OrderField::zeros(fine);
    for (i, j) in fine.mask_nodes() {
        let v = sample(field, coarse, fine.rho(i), fine.z(j));
        out.set(fine, i, j, v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_resolution() {
        assert!(matches!(Grid::build(8), Err(GridError::ResolutionTooCoarse(8))));
        assert!(Grid::build(16).is_ok());
    }

    #[test]
    fn axis_nodes_have_zero_rho() {
        let g = Grid::build(32).unwrap();
        for (i, j) in g.mask_nodes() {
            if g.tag(i, j) == NodeTag::AxisSegment {
                assert_eq!(g.rho(i), 0.0);
                let _ = j;
            }
        }
    }

    #[test]
    fn arc_band_within_staircase_tolerance() {
        let g = Grid::build(48).unwrap();
        for (i, j) in g.mask_nodes() {
            if g.tag(i, j) == NodeTag::ArcBoundary {
                let r_sq = g.rho(i).powi(2) + g.z(j).powi(2);
                assert!((r_sq - 1.0).abs() <= g.h + 1e-12);
            }
        }
    }

    #[test]
    fn ball_volume_quadrature() {
        let exact = FOUR_PI / 3.0;
        let g = Grid::build(16).unwrap();
        let ones = vec![1.0; g.node_count()];
        let v16 = integrate(&ones, &g).unwrap();
        assert!((v16 - exact).abs() / exact < 0.10, "n=16 volume {v16}");
        let g = Grid::build(256).unwrap();
        let ones = vec![1.0; g.node_count()];
        let v256 = integrate(&ones, &g).unwrap();
        assert!((v256 - exact).abs() / exact < 0.01, "n=256 volume {v256}");
    }

    #[test]
    fn quadrature_convergence_order() {
        let exact = FOUR_PI / 3.0;
        let errs: Vec<f64> = [32usize, 64, 128]
            .iter()
            .map(|&n| {
                let g = Grid::build(n).unwrap();
                let ones = vec![1.0; g.node_count()];
                (integrate(&ones, &g).unwrap() - exact).abs()
            })
            .collect();
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 >= 0.9 && order2 >= 0.9, "orders {order1} {order2}");
    }

    #[test]
    fn z_squared_moment() {
        let g = Grid::build(128).unwrap();
        let mut dens = vec![0.0; g.node_count()];
        for (i, j) in g.mask_nodes() {
            dens[g.idx(i, j)] = g.z(j).powi(2);
        }
        let exact = FOUR_PI / 15.0;
        let v = integrate(&dens, &g).unwrap();
        assert!((v - exact).abs() / exact < 0.02, "z^2 moment {v}");
    }

    #[test]
    fn zero_density_integrates_to_zero() {
        let g = Grid::build(16).unwrap();
        let zs = vec![0.0; g.node_count()];
        assert_eq!(integrate(&zs, &g).unwrap(), 0.0);
    }

    #[test]
    fn gradient_of_constant_field_vanishes() {
        let g = Grid::build(24).unwrap();
        let mut f = OrderField::zeros(&g);
        for (i, j) in g.mask_nodes() {
            f.set(&g, i, j, UVec::new(0.0, 0.7, 0.0));
        }
        // only u2 is constant-compatible with the symmetry ghosts;
        // staircase-exposed nodes fall back to one-sided stencils that
        // see the zero padding, so check full-stencil nodes
        let dg = gradient(&f, &g).unwrap();
        for (i, j) in g.mask_nodes() {
            if !full_stencil(&g, i, j) {
                continue;
            }
            assert!(dg[g.idx(i, j)][1][0].abs() < 1e-13);
            assert!(dg[g.idx(i, j)][1][1].abs() < 1e-13);
        }
    }

    /// All four stencil neighbors available (through ghosts at the
    /// axis and the equator).
    fn full_stencil(g: &Grid, i: usize, j: usize) -> bool {
        let left = i == 0 || g.in_mask(i - 1, j);
        let down = j == 0 || g.in_mask(i, j - 1);
        let right = g.in_mask(i + 1, j);
        let up = g.in_mask(i, j + 1);
        let ghost_r = i > 0 || g.in_mask(1, j);
        let ghost_u = j > 0 || g.in_mask(i, 1);
        left && down && right && up && ghost_r && ghost_u
    }

    #[test]
    fn gradient_matches_smooth_field() {
        // u2 = z^2 has dz = 2z; u3 = z has dz = 1 at z = 0 through the
        // odd ghost
        let g = Grid::build(64).unwrap();
        let mut f = OrderField::zeros(&g);
        for (i, j) in g.mask_nodes() {
            let z = g.z(j);
            f.set(&g, i, j, UVec::new(0.0, z * z, z));
        }
        let dg = gradient(&f, &g).unwrap();
        for (i, j) in g.mask_nodes() {
            if g.tag(i, j) != NodeTag::Interior || !full_stencil(&g, i, j) {
                continue;
            }
            let z = g.z(j);
            assert!((dg[g.idx(i, j)][1][1] - 2.0 * z).abs() < 1e-10);
            assert!((dg[g.idx(i, j)][2][1] - 1.0).abs() < 1e-10);
        }
        for i in 1..g.n {
            if g.in_mask(i, 0) && g.tag(i, 0) == NodeTag::EquatorT && full_stencil(&g, i, 0) {
                assert!((dg[g.idx(i, 0)][2][1] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gradient_interior_second_order() {
        // smooth test field even in z, odd extension unused
        let errs: Vec<f64> = [32usize, 64, 128]
            .iter()
            .map(|&n| {
                let g = Grid::build(n).unwrap();
                let mut f = OrderField::zeros(&g);
                for (i, j) in g.mask_nodes() {
                    let (r, z) = (g.rho(i), g.z(j));
                    f.set(&g, i, j, UVec::new(0.0, (2.0 * r).cos() * (z * z).cos(), 0.0));
                }
                let dg = gradient(&f, &g).unwrap();
                let mut err = 0.0f64;
                for (i, j) in g.mask_nodes() {
                    let (r, z) = (g.rho(i), g.z(j));
                    if g.tag(i, j) != NodeTag::Interior || r * r + z * z > 0.8 {
                        continue;
                    }
                    let exact_r = -2.0 * (2.0 * r).sin() * (z * z).cos();
                    let exact_z = -(2.0 * r).cos() * (z * z).sin() * 2.0 * z;
                    err = err
                        .max((dg[g.idx(i, j)][1][0] - exact_r).abs())
                        .max((dg[g.idx(i, j)][1][1] - exact_z).abs());
                }
                err
            })
            .collect();
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(order1 >= 1.8 && order2 >= 1.8, "orders {order1} {order2}");
    }

    #[test]
    fn restrict_to_t_layout() {
        let g = Grid::build(64).unwrap();
        let f = OrderField::zeros(&g);
        let row = restrict_to_t(&f, &g).unwrap();
        let expect = (0..=g.n).filter(|&i| g.in_mask(i, 0)).count();
        assert_eq!(row.len(), expect);
        for w in row.windows(2) {
            assert!(w[0].0 < w[1].0);
        }
        for (_, u) in row {
            assert_eq!(u.u3, 0.0);
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = Grid::build(32).unwrap();
        let g2 = Grid::build(16).unwrap();
        let f = OrderField::zeros(&g2);
        assert!(matches!(gradient(&f, &g), Err(GridError::ShapeError { .. })));
        assert!(matches!(restrict_to_t(&f, &g), Err(GridError::ShapeError { .. })));
    }

    #[test]
    fn prolong_preserves_smooth_fields() {
        let coarse = Grid::build(32).unwrap();
        let fine = Grid::build(64).unwrap();
        let mut f = OrderField::zeros(&coarse);
        for (i, j) in coarse.mask_nodes() {
            let (r, z) = (coarse.rho(i), coarse.z(j));
            f.set(&coarse, i, j, UVec::new(0.0, r + 0.5 * z, 0.0));
        }
        let pf = prolong(&f, &coarse, &fine).unwrap();
        for (i, j) in fine.mask_nodes() {
            let (r, z) = (fine.rho(i), fine.z(j));
            if r * r + z * z < 0.8 {
                let v = pf.at(&fine, i, j);
                assert!((v.u2 - (r + 0.5 * z)).abs() < 1e-12, "at {r} {z}: {}", v.u2);
            }
        }
    }
}
