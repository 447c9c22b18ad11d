//! Pointwise Q-tensor algebra for axially symmetric nematic states.
//!
//! Everything in this module is mesh-free: the reduced three-component
//! order parameter, its five-component azimuthal lift, the cubic
//! invariants, closed-form eigenvalues, phase classification, the
//! oriented director and the tangent-map families that describe core
//! asymptotics.

use thiserror::Error;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
    #[error("classification tolerance must be positive")]
    InvalidTolerance,
    #[error("director undefined: top eigenvalue pair is degenerate")]
    DegenerateDirector,
}

/// Obstacle family and level for the flat-boundary constraint on `u2`.
///
/// The plus family bounds `u2` from below by `b * H_a` with
/// `b` in (-1, -1/2]; the minus family bounds it from above by
/// `c * H_a` with `c` in (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obstacle {
    PlusFamily(f64),
    MinusFamily(f64),
}

impl Obstacle {
    pub fn level(&self) -> f64 {
        match *self {
            Obstacle::PlusFamily(b) => b,
            Obstacle::MinusFamily(c) => c,
        }
    }

    pub fn validate(&self) -> Result<(), TensorError> {
        match *self {
            Obstacle::PlusFamily(b) if b > -1.0 && b <= -0.5 => Ok(()),
            Obstacle::PlusFamily(b) => Err(TensorError::InvalidParameter(format!(
                "plus-family level b = {b} must lie in (-1, -1/2]"
            ))),
            Obstacle::MinusFamily(c) if c > 0.0 && c < 1.0 => Ok(()),
            Obstacle::MinusFamily(c) => Err(TensorError::InvalidParameter(format!(
                "minus-family level c = {c} must lie in (0, 1)"
            ))),
        }
    }
}

/// Physical constants of a run: reduced temperature `a`, coupling
/// `mu = a R^2`, obstacle family, and the derived constants `H_a`
/// (boundary amplitude) and `D_a` (bulk offset).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub a: f64,
    pub mu: f64,
    pub obstacle: Obstacle,
    pub h_a: f64,
    pub d_a: f64,
}

impl Params {
    pub fn new(a: f64, mu: f64, obstacle: Obstacle) -> Result<Self, TensorError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(TensorError::InvalidParameter(format!("a = {a} must be > 0")));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(TensorError::InvalidParameter(format!("mu = {mu} must be > 0")));
        }
        obstacle.validate()?;
        Ok(Params {
            a,
            mu,
            obstacle,
            h_a: amplitude_constant(a),
            d_a: bulk_offset(a),
        })
    }

    /// Obstacle threshold on `u2` in absolute units, `level * H_a`.
    pub fn obstacle_threshold(&self) -> f64 {
        self.obstacle.level() * self.h_a
    }
}

/// H_a = (3 + sqrt(9 + 8 a^2)) / (2 sqrt(2) a).
pub fn amplitude_constant(a: f64) -> f64 {
    (3.0 + (9.0 + 8.0 * a * a).sqrt()) / (2.0 * SQRT_2 * a)
}

/// D_a = 27/(16 a^3) [1 + 4a^2/3 + (1 + 8a^2/9)^(3/2)].
pub fn bulk_offset(a: f64) -> f64 {
    27.0 / (16.0 * a.powi(3))
        * (1.0 + 4.0 * a * a / 3.0 + (1.0 + 8.0 * a * a / 9.0).powf(1.5))
}

/// The scalar potential 2 D_a - 2 sqrt(2) h^3 + a (h^2 - 1)^2; it is
/// nonnegative for h >= 0 and vanishes exactly at h = H_a.
pub fn radial_potential(h: f64, a: f64) -> f64 {
    2.0 * bulk_offset(a) - 2.0 * SQRT_2 * h.powi(3) + a * (h * h - 1.0).powi(2)
}

/// Reduced order parameter at a point of the (rho, z) half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UVec {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl UVec {
    pub const ZERO: UVec = UVec { u1: 0.0, u2: 0.0, u3: 0.0 };

    pub fn new(u1: f64, u2: f64, u3: f64) -> Self {
        UVec { u1, u2, u3 }
    }

    pub fn norm_sq(&self) -> f64 {
        self.u1 * self.u1 + self.u2 * self.u2 + self.u3 * self.u3
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> UVec {
        UVec::new(self.u1 * s, self.u2 * s, self.u3 * s)
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite() && self.u3.is_finite()
    }
}

/// Azimuthal lift of the reduced order parameter:
/// (u1 cos2t, u1 sin2t, u2, u3 cos t, u3 sin t). Norm-preserving.
pub fn lift(u: UVec, theta: f64) -> [f64; 5] {
    let (s2, c2) = (2.0 * theta).sin_cos();
    let (s1, c1) = theta.sin_cos();
    [u.u1 * c2, u.u1 * s2, u.u2, u.u3 * c1, u.u3 * s1]
}

/// Full 3x3 symmetric traceless tensor of the axisymmetric ansatz at
/// azimuth `theta` and temperature `a`.
pub fn assemble_q(u: UVec, theta: f64, a: f64) -> [[f64; 3]; 3] {
    let (s2, c2) = (2.0 * theta).sin_cos();
    let (s1, c1) = theta.sin_cos();
    let k = a / SQRT_2;
    let r2 = 1.0 / SQRT_2;
    let r6 = 1.0 / 6.0_f64.sqrt();
    // v1 (cos2t L5 + sin2t L2) + v2 L4 + v3 (cost L1 + sint L3)
    let q11 = k * (u.u1 * c2 * r2 - u.u2 * r6);
    let q22 = k * (-u.u1 * c2 * r2 - u.u2 * r6);
    let q33 = k * (2.0 * u.u2 * r6);
    let q12 = k * (u.u1 * s2 * r2);
    let q13 = k * (u.u3 * c1 * r2);
    let q23 = k * (u.u3 * s1 * r2);
    [[q11, q12, q13], [q12, q22, q23], [q13, q23, q33]]
}

/// Cubic invariant of a five-component state.
pub fn s_invariant(w: &[f64; 5]) -> f64 {
    -w[2] * (w[0] * w[0] + w[1] * w[1])
        + SQRT_3 * w[1] * w[3] * w[4]
        + 0.5 * w[2] * (w[3] * w[3] + w[4] * w[4])
        + w[2].powi(3) / 3.0
        + 0.5 * SQRT_3 * w[0] * (w[3] * w[3] - w[4] * w[4])
}

/// Cubic invariant in reduced variables; equals `s_invariant` of the
/// lift for every azimuth.
pub fn p_invariant(u: UVec) -> f64 {
    -u.u1 * u.u1 * u.u2
        + 0.5 * SQRT_3 * u.u1 * u.u3 * u.u3
        + u.u2.powi(3) / 3.0
        + 0.5 * u.u2 * u.u3 * u.u3
}

/// Gradient of `p_invariant` with respect to (u1, u2, u3).
pub fn p_gradient(u: UVec) -> UVec {
    UVec::new(
        -2.0 * u.u1 * u.u2 + 0.5 * SQRT_3 * u.u3 * u.u3,
        -u.u1 * u.u1 + u.u2 * u.u2 + 0.5 * u.u3 * u.u3,
        SQRT_3 * u.u1 * u.u3 + u.u2 * u.u3,
    )
}

/// Phase of the local tensor by eigenvalue multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Isotropic,
    PositiveUniaxial,
    NegativeUniaxial,
    Biaxial,
}

/// Eigenvalues of the scaled tensor in the closed-form labels of the
/// axisymmetric ansatz. The first label is the azimuthal eigenvalue;
/// the second and third come from the meridional 2x2 block and always
/// satisfy `formula[1] <= formula[2]`, but `formula[0]` may interleave.
pub fn eigenvalues_formula(u: UVec) -> [f64; 3] {
    let s = u.u1 + u.u2 / SQRT_3;
    let g = u.u1 - SQRT_3 * u.u2;
    let d = (g * g + 4.0 * u.u3 * u.u3).sqrt();
    [-0.5 * s, 0.25 * s - 0.25 * d, 0.25 * s + 0.25 * d]
}

/// Eigenvalue data at a point: formula labels, the sorted view, the
/// phase at the default tolerance, and the director when orientable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenData {
    /// Eigenvalues sorted ascending.
    pub sorted: [f64; 3],
    /// Eigenvalues in formula labels (azimuthal first, then the
    /// meridional pair).
    pub formula: [f64; 3],
    pub phase: Phase,
    /// (e_rho, e_z) coefficients of the oriented director; `None` at
    /// isotropic or negative-uniaxial points and where the top
    /// eigenvector leaves the meridional plane.
    pub director: Option<[f64; 2]>,
}

/// Default classification tolerance, scaled by the field amplitude.
pub fn default_classify_tol(u: UVec) -> f64 {
    1e-6 * u.norm().max(1.0)
}

/// Classify a raw eigenvalue triple by its gaps.
pub fn classify(lambda: [f64; 3], tol: f64) -> Result<Phase, TensorError> {
    if !(tol > 0.0) {
        return Err(TensorError::InvalidTolerance);
    }
    let mut s = lambda;
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max_abs = s.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max_abs < tol {
        return Ok(Phase::Isotropic);
    }
    let lo_gap = s[1] - s[0];
    let hi_gap = s[2] - s[1];
    Ok(if lo_gap >= tol && hi_gap >= tol {
        Phase::Biaxial
    } else if lo_gap >= tol {
        Phase::NegativeUniaxial
    } else if hi_gap >= tol {
        Phase::PositiveUniaxial
    } else {
        // all three within tol of each other; trace-free input is then
        // indistinguishable from isotropic at this tolerance
        Phase::Isotropic
    })
}

/// Director formula applied to the pair (g, u3) with
/// g = u1 - sqrt(3) u2. Scale-invariant in (g, u3).
fn director_of_pair(g: f64, u3: f64) -> Result<[f64; 2], TensorError> {
    let d = (g * g + 4.0 * u3 * u3).sqrt();
    if d == 0.0 || !d.is_finite() {
        return Err(TensorError::DegenerateDirector);
    }
    if u3 == 0.0 {
        // the two-term formula degenerates to 0/0 on the g < 0 branch;
        // the tie is broken toward nonnegative e_z
        return Ok(if g > 0.0 { [1.0, 0.0] } else { [0.0, 1.0] });
    }
    // 1 + g/d loses all digits when g < 0 and |u3| << |g|; rewrite it
    // as 4 u3^2 / (d (d - g)) on that branch
    let one_plus = if g >= 0.0 { 1.0 + g / d } else { 4.0 * u3 * u3 / (d * (d - g)) };
    let root = one_plus.sqrt();
    Ok([0.5 * SQRT_2 * root, SQRT_2 * u3 / (d * root)])
}

/// Oriented director: the normalized meridional eigenvector of the
/// eigenvalue `formula[2]`, with nonnegative e_rho coefficient.
pub fn director(u: UVec) -> Result<[f64; 2], TensorError> {
    director_of_pair(u.u1 - SQRT_3 * u.u2, u.u3)
}

/// Full eigenvalue/phase/director data at the default tolerance.
pub fn eigen_data(u: UVec) -> EigenData {
    eigen_data_with_tol(u, default_classify_tol(u))
}

pub fn eigen_data_with_tol(u: UVec, tol: f64) -> EigenData {
    let formula = eigenvalues_formula(u);
    let mut sorted = formula;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let phase = classify(sorted, tol).unwrap_or(Phase::Isotropic);
    // orientable only when the largest eigenvalue is simple and is the
    // meridional-block one, so that the director stays in the
    // (e_rho, e_z) plane
    let director = match phase {
        Phase::PositiveUniaxial | Phase::Biaxial if formula[2] > formula[0] + tol => {
            director(u).ok()
        }
        _ => None,
    };
    EigenData { sorted, formula, phase, director }
}

/// Tangent-map families near cores: the lifted phase maps and the
/// endpoint director maps at the lowest/highest zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentMapKind {
    LambdaPlus,
    LambdaMinus,
    KappaPlus,
    KappaMinus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TangentValue {
    /// Five-component phase map value.
    Lifted([f64; 5]),
    /// (e_rho, e_z) director coefficients.
    Director([f64; 2]),
}

/// Lifted tangent map (0, 0, +-cos phi, sin phi cos theta, sin phi sin theta).
pub fn lambda_map(sign: f64, phi: f64, theta: f64) -> [f64; 5] {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    [0.0, 0.0, sign * cp, sp * ct, sp * st]
}

/// Director tangent map at the lower core endpoint. Equals e_z at
/// phi = 0 by convention.
pub fn kappa_plus(phi: f64) -> [f64; 2] {
    if phi == 0.0 {
        return [0.0, 1.0];
    }
    let (sp, cp) = phi.sin_cos();
    let root = (3.0 + sp * sp).sqrt();
    // 1 - sqrt(3) cos / root == 4 sin^2 / (root (root + sqrt(3) cos))
    let one_minus = if cp <= 0.0 {
        1.0 - SQRT_3 * cp / root
    } else {
        4.0 * sp * sp / (root * (root + SQRT_3 * cp))
    };
    let rt = one_minus.sqrt();
    [0.5 * SQRT_2 * rt, SQRT_2 * sp / (root * rt)]
}

/// Director tangent map at the upper core endpoint. Equals -e_z at
/// phi = pi by convention.
pub fn kappa_minus(phi: f64) -> [f64; 2] {
    if phi == std::f64::consts::PI {
        return [0.0, -1.0];
    }
    let (sp, cp) = phi.sin_cos();
    let root = (3.0 + sp * sp).sqrt();
    let one_plus = if cp >= 0.0 {
        1.0 + SQRT_3 * cp / root
    } else {
        4.0 * sp * sp / (root * (root - SQRT_3 * cp))
    };
    let rt = one_plus.sqrt();
    [0.5 * SQRT_2 * rt, -SQRT_2 * sp / (root * rt)]
}

pub fn tangent_map_eval(kind: TangentMapKind, phi: f64, theta: f64) -> TangentValue {
    match kind {
        TangentMapKind::LambdaPlus => TangentValue::Lifted(lambda_map(1.0, phi, theta)),
        TangentMapKind::LambdaMinus => TangentValue::Lifted(lambda_map(-1.0, phi, theta)),
        TangentMapKind::KappaPlus => TangentValue::Director(kappa_plus(phi)),
        TangentMapKind::KappaMinus => TangentValue::Director(kappa_minus(phi)),
    }
}

/// Limit director family on a shrinking circle around the ring, at
/// contour angle `phi_prime` in (-pi, pi) measured from e_rho, built
/// from the ring slope ratio `kappa_ring`.
///
/// Realized through the scale-invariant director formula with
/// (g, u3) = (kappa_ring * cos, sin); the exact endpoint values at
/// 0 and +-pi are e_rho and +-e_z.
pub fn ring_limit_director(kappa_ring: f64, phi_prime: f64) -> [f64; 2] {
    use std::f64::consts::PI;
    if phi_prime == 0.0 {
        return [1.0, 0.0];
    }
    if phi_prime >= PI {
        return [0.0, 1.0];
    }
    if phi_prime <= -PI {
        return [0.0, -1.0];
    }
    let (sp, cp) = phi_prime.sin_cos();
    director_of_pair(kappa_ring * cp, sp).unwrap_or([1.0, 0.0])
}

/// Strong-anchoring boundary state at polar angle `phi`:
/// H_a (sqrt(3)/2 sin^2, 3/2 (cos^2 - 1/3), sqrt(3) sin cos).
pub fn boundary_value(phi: f64, params: &Params) -> UVec {
    let (sp, cp) = phi.sin_cos();
    UVec::new(
        params.h_a * 0.5 * SQRT_3 * sp * sp,
        params.h_a * 1.5 * (cp * cp - 1.0 / 3.0),
        params.h_a * SQRT_3 * sp * cp,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn norm5(w: &[f64; 5]) -> f64 {
        w.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    #[test]
    fn lift_kills_theta_when_transverse_components_vanish() {
        let w = lift(UVec::new(0.0, 1.0, 0.0), PI / 7.0);
        assert_eq!(w, [0.0, 0.0, 1.0, 0.0, 0.0]);
        let w = lift(UVec::new(1.0, 0.0, 0.0), 0.0);
        assert_eq!(w, [1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn lift_preserves_norm() {
        let u = UVec::new(3.0, 4.0, 12.0);
        for k in 0..17 {
            let theta = k as f64 * 0.41;
            assert_relative_eq!(norm5(&lift(u, theta)), 13.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn assemble_q_basis_activation() {
        let z = assemble_q(UVec::ZERO, 0.4, 7.0);
        assert_eq!(z, [[0.0; 3]; 3]);
        // a = sqrt(2) with u = (0, 1, 0) picks out the uniaxial basis
        // matrix diag(-1, -1, 2)/sqrt(6)
        let q = assemble_q(UVec::new(0.0, 1.0, 0.0), 0.0, SQRT_2);
        let r6 = 1.0 / 6.0_f64.sqrt();
        for (row, expect) in q.iter().zip([[-r6, 0.0, 0.0], [0.0, -r6, 0.0], [0.0, 0.0, 2.0 * r6]]) {
            for (a, b) in row.iter().zip(expect) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn s_invariant_pointwise_values() {
        assert_relative_eq!(s_invariant(&[0.0, 0.0, 1.0, 0.0, 0.0]), 1.0 / 3.0);
        let w = lift(UVec::new(1.0, 1.0, 1.0), 0.0);
        assert_relative_eq!(
            s_invariant(&w),
            0.5 * SQRT_3 - 1.0 / 6.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn p_invariant_pointwise_values() {
        assert_relative_eq!(p_invariant(UVec::new(0.0, 1.0, 0.0)), 1.0 / 3.0);
        assert_eq!(p_invariant(UVec::new(1.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn params_derived_constants() {
        let p = Params::new(3.0, 1.0, Obstacle::PlusFamily(-0.95)).unwrap();
        assert_relative_eq!(p.h_a, SQRT_2, max_relative = 1e-12);
        assert_relative_eq!(p.d_a, 2.5, max_relative = 1e-12);
        // the bulk offset makes the radial potential vanish at H_a
        for &a in &[3.0, 10.0, 100.0] {
            let h = amplitude_constant(a);
            assert!(radial_potential(h, a).abs() < 1e-10 * (1.0 + a));
        }
    }

    #[test]
    fn obstacle_ranges() {
        assert!(Obstacle::PlusFamily(-0.95).validate().is_ok());
        assert!(Obstacle::PlusFamily(-0.5).validate().is_ok());
        assert!(Obstacle::PlusFamily(0.2).validate().is_err());
        assert!(Obstacle::PlusFamily(-1.0).validate().is_err());
        assert!(Obstacle::MinusFamily(0.95).validate().is_ok());
        assert!(Obstacle::MinusFamily(0.0).validate().is_err());
        assert!(Obstacle::MinusFamily(1.0).validate().is_err());
    }

    #[test]
    fn eigenvalues_at_named_states() {
        let e = eigen_data(UVec::new(0.0, 1.0, 0.0));
        let lam = 1.0 / (2.0 * SQRT_3);
        assert_relative_eq!(e.sorted[0], -lam, max_relative = 1e-14);
        assert_relative_eq!(e.sorted[1], -lam, max_relative = 1e-14);
        assert_relative_eq!(e.sorted[2], 1.0 / SQRT_3, max_relative = 1e-14);
        assert_eq!(e.phase, Phase::PositiveUniaxial);
        let dir = e.director.unwrap();
        assert_relative_eq!(dir[0], 0.0);
        assert_relative_eq!(dir[1], 1.0);

        let e = eigen_data(UVec::new(0.5 * SQRT_3, -0.5, 0.0));
        assert_relative_eq!(e.sorted[2], 1.0 / SQRT_3, max_relative = 1e-14);
        assert_eq!(e.phase, Phase::PositiveUniaxial);
        assert_eq!(e.director.unwrap(), [1.0, 0.0]);

        let e = eigen_data(UVec::ZERO);
        assert_eq!(e.sorted, [0.0, 0.0, 0.0]);
        assert_eq!(e.phase, Phase::Isotropic);
        assert_eq!(e.director, None);
    }

    #[test]
    fn classify_by_gap_pattern() {
        let s = 0.1;
        assert_eq!(
            classify([-2.0 * s, s, s], 1e-8).unwrap(),
            Phase::NegativeUniaxial
        );
        assert_eq!(
            classify([-s, -s, 2.0 * s], 1e-8).unwrap(),
            Phase::PositiveUniaxial
        );
        assert_eq!(
            classify([-3.0 * s, s, 2.0 * s], 1e-8).unwrap(),
            Phase::Biaxial
        );
        assert_eq!(classify([0.0, 0.0, 0.0], 1e-8).unwrap(), Phase::Isotropic);
        assert_eq!(classify([0.0, 0.0, 0.0], 0.0), Err(TensorError::InvalidTolerance));
    }

    #[test]
    fn director_branches() {
        // meridional gap along e_rho
        assert_eq!(director(UVec::new(1.0, 0.0, 0.0)).unwrap(), [1.0, 0.0]);
        // u3 -> 0+ with negative gap tends to e_z
        let d = director(UVec::new(0.0, 1.0, 1e-9)).unwrap();
        assert!(d[0] < 1e-4 && (d[1] - 1.0).abs() < 1e-8);
        // tie at exactly u3 = 0 breaks to e_z
        assert_eq!(director(UVec::new(0.0, 1.0, 0.0)).unwrap(), [0.0, 1.0]);
        assert_eq!(
            director(UVec::ZERO),
            Err(TensorError::DegenerateDirector)
        );
    }

    #[test]
    fn tangent_map_endpoint_values() {
        assert_eq!(lambda_map(1.0, 0.0, 0.3), [0.0, 0.0, 1.0, 0.0, 0.0]);
        let lm = lambda_map(-1.0, PI / 2.0, 0.0);
        assert!(lm[2].abs() < 1e-16 && (lm[3] - 1.0).abs() < 1e-15 && lm[4].abs() < 1e-15);

        // kappa- at phi = 0 is exactly e_rho
        let k = kappa_minus(0.0);
        assert_relative_eq!(k[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(k[1], 0.0);
        // kappa+ at the equator
        let k = kappa_plus(PI / 2.0);
        assert_relative_eq!(k[0], 0.5 * SQRT_2, max_relative = 1e-14);
        assert_relative_eq!(k[1], 0.5 * SQRT_2, max_relative = 1e-14);
        // stated endpoint values
        assert_eq!(kappa_plus(0.0), [0.0, 1.0]);
        assert_eq!(kappa_minus(PI), [0.0, -1.0]);
        // the dispatcher routes to the same values
        assert_eq!(
            tangent_map_eval(TangentMapKind::KappaPlus, 0.0, 0.0),
            TangentValue::Director([0.0, 1.0])
        );
        assert_eq!(
            tangent_map_eval(TangentMapKind::LambdaPlus, 0.0, 0.3),
            TangentValue::Lifted([0.0, 0.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn tangent_maps_unit_length() {
        for k in 0..=64 {
            let phi = PI * k as f64 / 64.0;
            for m in 0..5 {
                let theta = 2.0 * PI * m as f64 / 5.0;
                assert_relative_eq!(
                    norm5(&lambda_map(1.0, phi, theta)),
                    1.0,
                    max_relative = 1e-13
                );
                assert_relative_eq!(
                    norm5(&lambda_map(-1.0, phi, theta)),
                    1.0,
                    max_relative = 1e-13
                );
            }
            for kv in [kappa_plus(phi), kappa_minus(phi)] {
                assert_relative_eq!(
                    (kv[0] * kv[0] + kv[1] * kv[1]).sqrt(),
                    1.0,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn ring_limit_director_values() {
        // ctan vanishes at phi' = pi/2, any slope ratio
        let d = ring_limit_director(0.7, PI / 2.0);
        assert_relative_eq!(d[0], 0.5 * SQRT_2, max_relative = 1e-14);
        assert_relative_eq!(d[1], 0.5 * SQRT_2, max_relative = 1e-14);
        assert_eq!(ring_limit_director(0.7, 0.0), [1.0, 0.0]);
        assert_eq!(ring_limit_director(0.7, PI), [0.0, 1.0]);
        assert_eq!(ring_limit_director(0.7, -PI), [0.0, -1.0]);
        // lower semicircle has negative e_z coefficient
        let d = ring_limit_director(0.7, -PI / 2.0);
        assert!(d[1] < 0.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn any_u() -> impl Strategy<Value = UVec> {
            (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
                .prop_map(|(a, b, c)| UVec::new(a, b, c))
        }

        proptest! {
            #[test]
            fn lift_preserves_norm(u in any_u(), theta in -7.0..7.0f64) {
                let w = lift(u, theta);
                let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                prop_assert!((nw - u.norm()).abs() <= 1e-12 * (1.0 + u.norm()));
            }

            #[test]
            fn s_of_lift_is_theta_free_and_equals_p(
                u in any_u(),
                t1 in -7.0..7.0f64,
                t2 in -7.0..7.0f64,
            ) {
                let s1 = s_invariant(&lift(u, t1));
                let s2 = s_invariant(&lift(u, t2));
                let p = p_invariant(u);
                let scale = 1.0 + u.norm().powi(3);
                prop_assert!((s1 - s2).abs() <= 1e-12 * scale);
                prop_assert!((s1 - p).abs() <= 1e-12 * scale);
            }

            #[test]
            fn eigenvalues_sum_to_zero(u in any_u()) {
                let lam = eigenvalues_formula(u);
                prop_assert!((lam[0] + lam[1] + lam[2]).abs() <= 1e-12 * (1.0 + u.norm()));
            }

            #[test]
            fn director_is_unit_with_nonnegative_rho(u in any_u()) {
                if let Ok(d) = director(u) {
                    prop_assert!((d[0] * d[0] + d[1] * d[1] - 1.0).abs() <= 1e-12);
                    prop_assert!(d[0] >= 0.0);
                }
            }

            #[test]
            fn s_bound_on_unit_lifts(u in any_u(), theta in -7.0..7.0f64) {
                let n = u.norm();
                prop_assume!(n > 1e-3);
                let s = s_invariant(&lift(u.scale(1.0 / n), theta));
                prop_assert!(s <= 1.0 / 3.0 + 1e-9);
            }
        }
    }

    #[test]
    fn boundary_value_closed_forms() {
        let p = Params::new(3.0, 1.0, Obstacle::PlusFamily(-0.95)).unwrap();
        let b = boundary_value(0.0, &p);
        assert_relative_eq!(b.u1, 0.0);
        assert_relative_eq!(b.u2, SQRT_2, max_relative = 1e-13);
        assert_relative_eq!(b.u3, 0.0);
        let b = boundary_value(PI / 2.0, &p);
        assert_relative_eq!(b.u1, 6.0_f64.sqrt() / 2.0, max_relative = 1e-13);
        assert_relative_eq!(b.u2, -SQRT_2 / 2.0, max_relative = 1e-13);
        assert!(b.u3.abs() < 1e-15);
        for k in 0..100 {
            let phi = PI * (k as f64 + 0.5) / 100.0;
            assert_relative_eq!(
                boundary_value(phi, &p).norm(),
                p.h_a,
                max_relative = 1e-13
            );
        }
    }
}
