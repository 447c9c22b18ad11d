//! Structural analysis of converged fields: axis zeros and their
//! parity, ring detection on the flat boundary, director winding,
//! phase maps, split-segment classification, core tangent-map fits
//! and the core non-degeneracy ratio.

use crate::grid::{sample, Grid, GridError, OrderField};
use crate::tensor::{
    self, director, eigen_data_with_tol, eigenvalues_formula, Params, Phase, TangentMapKind,
    SQRT_3,
};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Shape(#[from] GridError),
    #[error("director degenerate at sample {sample}")]
    DegenerateDirector { sample: usize },
    #[error("ring slope violates the expected sign: dz u3 = {0:e} at the crossing")]
    DegenerateRing(f64),
    #[error("field amplitude below 1e-12 on the sample circle")]
    CoreTooLarge,
    #[error("core ball resolved by fewer than 8 cells: radius {radius:e}, h {h:e}")]
    CoreUnderResolved { radius: f64, h: f64 },
    #[error("invalid analysis request: {0}")]
    InvalidRequest(String),
}

/// Zeros of the field on the positive symmetry axis, located as sign
/// changes of u2 with linear interpolation. `threshold` is a hysteresis
/// floor: a crossing counts only between samples whose magnitude
/// exceeds it on both sides, which suppresses sub-noise ripples inside
/// a core.
pub fn find_axis_zeros(field: &OrderField, grid: &Grid, threshold: f64) -> Vec<f64> {
    let top = grid.column_height(0);
    let u2 = |j: usize| field.at(grid, 0, j).u2;
    let mut zeros = Vec::new();
    let mut last_sign = 0.0f64;
    let mut last_idx = 0usize;
    for j in 1..=top {
        let v = u2(j);
        if v.abs() <= threshold {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            // locate the adjacent sign-change pair inside the window
            for k in last_idx..j {
                let a = u2(k);
                let b = u2(k + 1);
                if a * b < 0.0 {
                    zeros.push(grid.z(k) + grid.h * a / (a - b));
                    break;
                } else if a != 0.0 && b == 0.0 {
                    zeros.push(grid.z(k + 1));
                    break;
                }
            }
        }
        last_sign = s;
        last_idx = j;
    }
    zeros
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingData {
    /// Interpolated radius of the negative-uniaxial circle on T.
    pub rho: f64,
    /// Slope ratio (d_rho u1 - sqrt(3) d_rho u2) / (dz u3) there.
    pub kappa: f64,
}

/// Locate the ring on the flat boundary: the crossing of
/// g = u1 - sqrt(3) u2 from negative to positive as rho increases.
pub fn find_ring(field: &OrderField, grid: &Grid) -> Result<Option<RingData>, AnalysisError> {
    if field.n != grid.n {
        return Err(GridError::ShapeError { field: field.n, grid: grid.n }.into());
    }
    let g = |i: usize| {
        let u = field.at(grid, i, 0);
        u.u1 - SQRT_3 * u.u2
    };
    let mut i_max = 0;
    for i in 0..=grid.n {
        if grid.in_mask(i, 0) {
            i_max = i;
        }
    }
    for i in 0..i_max {
        let a = g(i);
        let b = g(i + 1);
        if a < 0.0 && b >= 0.0 {
            let t = a / (a - b);
            let rho = grid.rho(i) + grid.h * t;
            // slope of g across the crossing interval
            let dg = (b - a) / grid.h;
            // one-sided dz u3 from above T; u3 is odd so the quotient
            // u3(., h)/h is second-order accurate
            let q_i = field.at(grid, i, 1).u3 / grid.h;
            let q_ip = field.at(grid, i + 1, 1).u3 / grid.h;
            let dzu3 = (1.0 - t) * q_i + t * q_ip;
            if dzu3 <= 0.0 {
                return Err(AnalysisError::DegenerateRing(dzu3));
            }
            return Ok(Some(RingData { rho, kappa: dg / dzu3 }));
        }
    }
    Ok(None)
}

fn kappa_at(field: &OrderField, grid: &Grid, rho: f64, z: f64) -> Option<[f64; 2]> {
    let u = sample(field, grid, rho, z);
    director(u).ok()
}

/// Total director angle change along a counter-clockwise circle,
/// starting on the lower-left side. The director is a line field, so
/// consecutive samples are matched to the nearest of the two branch
/// signs before the angle increments are accumulated.
pub fn director_winding(
    field: &OrderField,
    grid: &Grid,
    center: (f64, f64),
    r: f64,
    samples: usize,
) -> Result<f64, AnalysisError> {
    if samples < 8 {
        return Err(AnalysisError::InvalidRequest(format!(
            "need at least 8 samples, got {samples}"
        )));
    }
    let (c_rho, c_z) = center;
    let point = |k: usize| {
        let phi = -PI + (k as f64 + 0.5) * 2.0 * PI / samples as f64;
        (c_rho + r * phi.cos(), c_z + r * phi.sin())
    };
    let (p0, q0) = point(0);
    let mut prev =
        kappa_at(field, grid, p0, q0).ok_or(AnalysisError::DegenerateDirector { sample: 0 })?;
    let mut total = 0.0;
    for k in 1..samples {
        let (p, q) = point(k);
        let mut cur =
            kappa_at(field, grid, p, q).ok_or(AnalysisError::DegenerateDirector { sample: k })?;
        if prev[0] * cur[0] + prev[1] * cur[1] < 0.0 {
            cur = [-cur[0], -cur[1]];
        }
        let cross = prev[0] * cur[1] - prev[1] * cur[0];
        let dot = prev[0] * cur[0] + prev[1] * cur[1];
        total += cross.atan2(dot);
        prev = cur;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisPoint {
    pub z: f64,
    pub u2: f64,
    pub state: Phase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentReport {
    /// Lowest axis zero; the mirror endpoint sits at -z_plus.
    pub z_plus: f64,
    /// Axis nodes strictly inside (0, z_plus) that classify negative
    /// uniaxial, out of `interior_total`.
    pub interior_negative: usize,
    pub interior_total: usize,
    /// Axis nodes in the flank window above z_plus that classify
    /// positive uniaxial, out of `flank_total`.
    pub flank_positive: usize,
    pub flank_total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumbbellReport {
    pub r0: f64,
    pub r1: f64,
    pub checked: usize,
    pub biaxial: usize,
    /// Nodes with the split-core eigenvalue order: the azimuthal label
    /// strictly between the meridional pair.
    pub ordered: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldClassification {
    /// Per-node phase labels (meaningful on the mask).
    pub phases: Vec<Phase>,
    pub axis: Vec<AxisPoint>,
    pub zeros: Vec<f64>,
    pub segment: Option<SegmentReport>,
    pub dumbbell: Option<DumbbellReport>,
}

impl FieldClassification {
    pub fn phase_counts(&self, grid: &Grid) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for (i, j) in grid.mask_nodes() {
            let k = match self.phases[grid.idx(i, j)] {
                Phase::Isotropic => 0,
                Phase::PositiveUniaxial => 1,
                Phase::NegativeUniaxial => 2,
                Phase::Biaxial => 3,
            };
            counts[k] += 1;
        }
        counts
    }
}

/// Per-node phase map plus the axis/segment/dumbbell summaries.
pub fn classify_field(
    field: &OrderField,
    grid: &Grid,
    params: &Params,
    tol: f64,
) -> Result<FieldClassification, AnalysisError> {
    if field.n != grid.n {
        return Err(GridError::ShapeError { field: field.n, grid: grid.n }.into());
    }
    let mut phases = vec![Phase::Isotropic; grid.node_count()];
    for (i, j) in grid.mask_nodes() {
        let e = eigen_data_with_tol(field.at(grid, i, j), tol);
        phases[grid.idx(i, j)] = e.phase;
    }
    let mut axis = Vec::new();
    for j in 1..=grid.column_height(0) {
        let u2 = field.at(grid, 0, j).u2;
        let state = if u2 > tol {
            Phase::PositiveUniaxial
        } else if u2 < -tol {
            Phase::NegativeUniaxial
        } else {
            Phase::Isotropic
        };
        axis.push(AxisPoint { z: grid.z(j), u2, state });
    }
    let zeros = find_axis_zeros(field, grid, (0.01 * params.h_a).max(tol));

    let (segment, dumbbell) = if let Some(&z_plus) = zeros.first() {
        let core_est = 3.0 / (params.a * params.mu).sqrt();
        let mut r0 = 3.0 * core_est;
        if r0 >= 0.9 * z_plus {
            r0 = 0.9 * z_plus;
        }
        r0 = r0.max(4.0 * grid.h);
        let r1 = r0 / 3.0;

        let margin = 2.0 * grid.h;
        let mut interior_negative = 0;
        let mut interior_total = 0;
        let mut flank_positive = 0;
        let mut flank_total = 0;
        for p in &axis {
            if p.z > margin && p.z < z_plus - margin {
                interior_total += 1;
                if p.state == Phase::NegativeUniaxial {
                    interior_negative += 1;
                }
            }
            let above_next = zeros.get(1).copied().unwrap_or(f64::INFINITY);
            if p.z > z_plus + margin && p.z < (z_plus + r0).min(above_next - margin) {
                flank_total += 1;
                if p.state == Phase::PositiveUniaxial {
                    flank_positive += 1;
                }
            }
        }
        let segment = SegmentReport {
            z_plus,
            interior_negative,
            interior_total,
            flank_positive,
            flank_total,
        };

        // dumbbell: two disks of radius r0 around the mirrored endpoints
        // joined by a slab of half-width sqrt(r1 (2 r0 - r1))
        let rho_rect = (r1 * (2.0 * r0 - r1)).sqrt();
        let z_rect = z_plus - r0 + r1;
        let mut checked = 0;
        let mut biaxial = 0;
        let mut ordered = 0;
        for (i, j) in grid.mask_nodes() {
            if i == 0 {
                continue;
            }
            let rho = grid.rho(i);
            let z = grid.z(j);
            let in_disk = rho * rho + (z - z_plus).powi(2) < r0 * r0;
            let in_slab = rho <= rho_rect && z <= z_rect;
            if !(in_disk || in_slab) {
                continue;
            }
            checked += 1;
            let u = field.at(grid, i, j);
            if eigen_data_with_tol(u, tol).phase == Phase::Biaxial {
                biaxial += 1;
            }
            let f = eigenvalues_formula(u);
            if f[1] < f[0] && f[0] < f[2] {
                ordered += 1;
            }
        }
        (Some(segment), Some(DumbbellReport { r0, r1, checked, biaxial, ordered }))
    } else {
        (None, None)
    };

    Ok(FieldClassification { phases, axis, zeros, segment, dumbbell })
}

/// Sup-norm deviation of the sampled director on a circle around the
/// ring against the closed-form limit family built from the slope
/// ratio, excluding 0.1-wide windows around the contour angles
/// {-pi, 0, pi} where the limit switches branch.
pub fn ring_tangent_limit(
    field: &OrderField,
    grid: &Grid,
    rho_a: f64,
    kappa_a: f64,
    r: f64,
    samples: usize,
) -> Result<f64, AnalysisError> {
    if samples < 16 {
        return Err(AnalysisError::InvalidRequest(format!(
            "need at least 16 samples, got {samples}"
        )));
    }
    let mut worst = 0.0f64;
    for k in 0..samples {
        let phi = -PI + (k as f64 + 0.5) * 2.0 * PI / samples as f64;
        if phi.abs() < 0.1 || (PI - phi.abs()) < 0.1 {
            continue;
        }
        let p = (rho_a + r * phi.cos(), r * phi.sin());
        let d = kappa_at(field, grid, p.0, p.1)
            .ok_or(AnalysisError::DegenerateDirector { sample: k })?;
        let lim = tensor::ring_limit_director(kappa_a, phi);
        let dev = ((d[0] - lim[0]).powi(2) + (d[1] - lim[1]).powi(2)).sqrt();
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Which lifted tangent map fits a core best.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoreFit {
    pub kind: TangentMapKind,
    pub samples: usize,
}

/// Compare the normalized phase map on a circle around an axis zero to
/// the two lifted tangent-map candidates (reduced forms
/// (0, +-cos psi, sin psi)); returns the better fit and its sup
/// deviation.
pub fn core_tangent_limit(
    field: &OrderField,
    grid: &Grid,
    z_core: f64,
    r: f64,
    samples: usize,
) -> Result<(CoreFit, f64), AnalysisError> {
    if samples < 8 {
        return Err(AnalysisError::InvalidRequest(format!(
            "need at least 8 samples, got {samples}"
        )));
    }
    let mut dev_plus = 0.0f64;
    let mut dev_minus = 0.0f64;
    for k in 0..samples {
        let psi = (k as f64 + 0.5) * PI / samples as f64;
        let (sp, cp) = psi.sin_cos();
        let u = sample(field, grid, r * sp, z_core + r * cp);
        let norm = u.norm();
        if norm < 1e-12 {
            return Err(AnalysisError::CoreTooLarge);
        }
        let hat = u.scale(1.0 / norm);
        let dp = (hat.u1.powi(2) + (hat.u2 - cp).powi(2) + (hat.u3 - sp).powi(2)).sqrt();
        let dm = (hat.u1.powi(2) + (hat.u2 + cp).powi(2) + (hat.u3 - sp).powi(2)).sqrt();
        dev_plus = dev_plus.max(dp);
        dev_minus = dev_minus.max(dm);
    }
    if dev_plus <= dev_minus {
        Ok((CoreFit { kind: TangentMapKind::LambdaPlus, samples }, dev_plus))
    } else {
        Ok((CoreFit { kind: TangentMapKind::LambdaMinus, samples }, dev_minus))
    }
}

/// Discrete minimum of |u| / (sqrt(a) dist) over the grid nodes within
/// distance R a^(-1/2) of an axis zero, the zero itself excluded. The
/// scale-invariant floor of this ratio is the profile quantity
/// c_mu(R).
pub fn nondegeneracy_check(
    field: &OrderField,
    grid: &Grid,
    params: &Params,
    z_core: f64,
    r_cap: f64,
) -> Result<f64, AnalysisError> {
    let radius = r_cap / params.a.sqrt();
    if radius < 8.0 * grid.h {
        return Err(AnalysisError::CoreUnderResolved { radius, h: grid.h });
    }
    let sqrt_a = params.a.sqrt();
    let mut min_ratio = f64::INFINITY;
    for (i, j) in grid.mask_nodes() {
        let rho = grid.rho(i);
        let z = grid.z(j);
        let dist = (rho * rho + (z - z_core).powi(2)).sqrt();
        if dist < 1e-9 || dist > radius {
            continue;
        }
        let ratio = field.at(grid, i, j).norm() / (sqrt_a * dist);
        min_ratio = min_ratio.min(ratio);
    }
    if !min_ratio.is_finite() {
        return Err(AnalysisError::InvalidRequest(format!(
            "no grid nodes inside the core ball at z = {z_core}"
        )));
    }
    Ok(min_ratio)
}

/// Headline summary assembled from the individual analyses.
#[derive(Debug, Clone)]
pub struct DisclinationReport {
    pub axis_zeros: Vec<f64>,
    pub parity_even: bool,
    pub ring: Option<RingData>,
    pub classification: FieldClassification,
    pub winding: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub zero_threshold: f64,
    pub classify_tol: f64,
    /// (rho, z, r, samples) of an optional winding circle.
    pub winding: Option<(f64, f64, f64, usize)>,
    pub detect_ring: bool,
}

impl AnalysisOptions {
    pub fn standard(params: &Params) -> Self {
        AnalysisOptions {
            zero_threshold: 0.01 * params.h_a,
            classify_tol: 1e-6 * params.h_a.max(1.0),
            winding: None,
            detect_ring: true,
        }
    }
}

pub fn analyze(
    field: &OrderField,
    grid: &Grid,
    params: &Params,
    opts: &AnalysisOptions,
) -> Result<DisclinationReport, AnalysisError> {
    let axis_zeros = find_axis_zeros(field, grid, opts.zero_threshold);
    let parity_even = axis_zeros.len() % 2 == 0;
    let ring = if opts.detect_ring { find_ring(field, grid)? } else { None };
    let classification = classify_field(field, grid, params, opts.classify_tol)?;
    let winding = match opts.winding {
        Some((rho, z, r, samples)) => Some(director_winding(field, grid, (rho, z), r, samples)?),
        None => None,
    };
    Ok(DisclinationReport { axis_zeros, parity_even, ring, classification, winding })
}

impl DisclinationReport {
    /// Machine-parseable report: one `key = value` line per fact,
    /// grouped in bracketed sections.
    pub fn to_text(&self, grid: &Grid) -> String {
        let mut out = String::new();
        out.push_str("[axis]\n");
        out.push_str(&format!("zero_count = {}\n", self.axis_zeros.len()));
        out.push_str(&format!(
            "parity = {}\n",
            if self.parity_even { "even" } else { "odd" }
        ));
        for (k, z) in self.axis_zeros.iter().enumerate() {
            out.push_str(&format!("zero_{} = {:.10e}\n", k + 1, z));
        }
        out.push_str("\n[ring]\n");
        match &self.ring {
            Some(r) => {
                out.push_str("found = true\n");
                out.push_str(&format!("rho = {:.10e}\n", r.rho));
                out.push_str(&format!("kappa = {:.10e}\n", r.kappa));
            }
            None => out.push_str("found = false\n"),
        }
        let counts = self.classification.phase_counts(grid);
        out.push_str("\n[phases]\n");
        out.push_str(&format!("isotropic = {}\n", counts[0]));
        out.push_str(&format!("positive_uniaxial = {}\n", counts[1]));
        out.push_str(&format!("negative_uniaxial = {}\n", counts[2]));
        out.push_str(&format!("biaxial = {}\n", counts[3]));
        if let Some(seg) = &self.classification.segment {
            out.push_str("\n[segment]\n");
            out.push_str(&format!("z_plus = {:.10e}\n", seg.z_plus));
            out.push_str(&format!("z_minus = {:.10e}\n", -seg.z_plus));
            out.push_str(&format!(
                "interior_negative_uniaxial = {}/{}\n",
                seg.interior_negative, seg.interior_total
            ));
            out.push_str(&format!(
                "flank_positive_uniaxial = {}/{}\n",
                seg.flank_positive, seg.flank_total
            ));
        }
        if let Some(db) = &self.classification.dumbbell {
            out.push_str("\n[dumbbell]\n");
            out.push_str(&format!("r0 = {:.10e}\n", db.r0));
            out.push_str(&format!("r1 = {:.10e}\n", db.r1));
            out.push_str(&format!("checked = {}\n", db.checked));
            out.push_str(&format!("biaxial = {}\n", db.biaxial));
            out.push_str(&format!("ordered = {}\n", db.ordered));
        }
        if let Some(w) = self.winding {
            out.push_str("\n[winding]\n");
            out.push_str(&format!("total = {:.10e}\n", w));
        }
        out
    }
}
