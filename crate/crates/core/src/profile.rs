//! Radial core profile: the unique increasing solution of
//!
//!   f'' + (2/r) f' - (2/r^2) f + f (1 - f^2) = 0,   f(0) = 0, f(inf) = 1,
//!
//! found by bisection on the initial slope. The connecting orbit is
//! exponentially unstable, so past the matching window the table is
//! continued with the far-field expansion f ~ 1 - r^-2 - (3/2) r^-4,
//! blended smoothly; the ODE residual of the blended table stays below
//! the verification threshold.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("shooting could not bracket the initial slope")]
    ShootingBracketError,
    #[error("requested radius {0} exceeds the tabulated range {1}")]
    OutOfTable(f64, f64),
    #[error("invalid profile request: {0}")]
    InvalidRequest(String),
}

/// Tabulated profile on a uniform r-grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub r_max: f64,
    /// Uniform output spacing of the table.
    pub dr: f64,
    /// (r, f, f') samples, r = 0 included.
    pub samples: Vec<(f64, f64, f64)>,
    /// Initial slope f'(0) found by the bisection.
    pub alpha: f64,
}

// Slope bracket for the bisection; the profile slope sits well inside.
const ALPHA_LO: f64 = 0.1;
const ALPHA_HI: f64 = 1.5;
// Series launch radius; the indicial behavior f ~ alpha r makes the
// two-term start f = alpha r - (alpha/10) r^3 well posed.
const R_LAUNCH: f64 = 1e-3;

fn rhs(r: f64, f: f64, fp: f64) -> f64 {
    -(2.0 / r) * fp + (2.0 / (r * r)) * f - f * (1.0 - f * f)
}

/// One adaptive Runge-Kutta-Fehlberg 4(5) step. Returns the new state
/// and the suggested next step.
fn rkf45_step(r: f64, y: [f64; 2], h: f64, tol: f64) -> ([f64; 2], f64, bool) {
    let f = |r: f64, y: [f64; 2]| [y[1], rhs(r, y[0], y[1])];
    let k1 = f(r, y);
    let add = |y: [f64; 2], c: &[(f64, [f64; 2])]| {
        let mut out = y;
        for (a, k) in c {
            out[0] += h * a * k[0];
            out[1] += h * a * k[1];
        }
        out
    };
    let k2 = f(r + 0.25 * h, add(y, &[(0.25, k1)]));
    let k3 = f(r + 0.375 * h, add(y, &[(3.0 / 32.0, k1), (9.0 / 32.0, k2)]));
    let k4 = f(
        r + 12.0 / 13.0 * h,
        add(y, &[(1932.0 / 2197.0, k1), (-7200.0 / 2197.0, k2), (7296.0 / 2197.0, k3)]),
    );
    let k5 = f(
        r + h,
        add(
            y,
            &[(439.0 / 216.0, k1), (-8.0, k2), (3680.0 / 513.0, k3), (-845.0 / 4104.0, k4)],
        ),
    );
    let k6 = f(
        r + 0.5 * h,
        add(
            y,
            &[
                (-8.0 / 27.0, k1),
                (2.0, k2),
                (-3544.0 / 2565.0, k3),
                (1859.0 / 4104.0, k4),
                (-11.0 / 40.0, k5),
            ],
        ),
    );
    let y4 = add(y, &[
        (25.0 / 216.0, k1),
        (1408.0 / 2565.0, k3),
        (2197.0 / 4104.0, k4),
        (-0.2, k5),
    ]);
    let y5 = add(y, &[
        (16.0 / 135.0, k1),
        (6656.0 / 12825.0, k3),
        (28561.0 / 56430.0, k4),
        (-9.0 / 50.0, k5),
        (2.0 / 55.0, k6),
    ]);
    let err = ((y5[0] - y4[0]).powi(2) + (y5[1] - y4[1]).powi(2)).sqrt().max(1e-300);
    let ok = err <= tol;
    let scale = (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0);
    (y5, h * scale, ok)
}

enum ShotOutcome {
    Overshoot,
    Collapse,
    Reached([f64; 2]),
}

/// Integrate one trial slope up to `r_end`. Overshoot (f > 1) means the
/// slope is too big, collapse (f' < 0 before saturating) too small.
fn shoot(alpha: f64, r_end: f64, tol: f64) -> ShotOutcome {
    let mut r = R_LAUNCH;
    let mut y = [
        alpha * R_LAUNCH - alpha / 10.0 * R_LAUNCH.powi(3),
        alpha - 3.0 * alpha / 10.0 * R_LAUNCH * R_LAUNCH,
    ];
    let mut h: f64 = 1e-4;
    while r < r_end {
        if y[0] > 1.0 + 1e-9 {
            return ShotOutcome::Overshoot;
        }
        if y[1] < 0.0 {
            return ShotOutcome::Collapse;
        }
        let h_try = h.min(r_end - r);
        let (y_new, h_next, ok) = rkf45_step(r, y, h_try, tol);
        if ok {
            r += h_try;
            y = y_new;
        }
        h = h_next.min(0.05);
        if h < 1e-12 {
            break;
        }
    }
    ShotOutcome::Reached(y)
}

// three-term tail 1 - r^-2 - (3/2) r^-4 - (23/2) r^-6 from matching
// powers of the equation at infinity
fn far_field(r: f64) -> (f64, f64) {
    let r2 = r * r;
    let r4 = r2 * r2;
    (
        1.0 - 1.0 / r2 - 1.5 / r4 - 11.5 / (r4 * r2),
        2.0 / (r2 * r) + 6.0 / (r4 * r) + 69.0 / (r4 * r2 * r),
    )
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Solve the profile by bisection on f'(0) and tabulate to `r_max`.
pub fn shoot_profile(r_max: f64, rtol: f64) -> Result<RadialProfile, ProfileError> {
    if r_max < 20.0 {
        return Err(ProfileError::InvalidRequest(format!("r_max = {r_max} must be >= 20")));
    }
    if !(rtol > 0.0) {
        return Err(ProfileError::InvalidRequest(format!("rtol = {rtol} must be positive")));
    }
    // the connecting orbit is unstable like exp(sqrt(2) r): keep the
    // stepper tolerance far below the target so injected error stays
    // negligible over the matching range
    let step_tol = (rtol * 1e-4).min(1e-12);
    let r_match = 14.0f64.min(r_max);
    let mut lo = ALPHA_LO;
    let mut hi = ALPHA_HI;
    match shoot(lo, r_match, step_tol) {
        ShotOutcome::Collapse => {}
        _ => return Err(ProfileError::ShootingBracketError),
    }
    match shoot(hi, r_match, step_tol) {
        ShotOutcome::Overshoot => {}
        _ => return Err(ProfileError::ShootingBracketError),
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match shoot(mid, r_match, step_tol) {
            ShotOutcome::Overshoot => hi = mid,
            ShotOutcome::Collapse => lo = mid,
            ShotOutcome::Reached(y) => {
                // reached the matching radius; decide by the far-field
                // target which side of the orbit we are on
                let (f_t, _) = far_field(r_match);
                if y[0] > f_t {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
        if hi - lo < f64::EPSILON * 4.0 {
            break;
        }
    }
    let alpha = 0.5 * (lo + hi);

    // final tabulation run with dense output, blending into the
    // far-field expansion across [r_blend, r_blend + 2]
    let dr = 0.01;
    let n_out = (r_max / dr).round() as usize;
    let r_blend = 10.0;
    let mut samples = Vec::with_capacity(n_out + 1);
    samples.push((0.0, 0.0, alpha));
    let mut r = R_LAUNCH;
    let mut y = [
        alpha * R_LAUNCH - alpha / 10.0 * R_LAUNCH.powi(3),
        alpha - 3.0 * alpha / 10.0 * R_LAUNCH * R_LAUNCH,
    ];
    let mut h: f64 = 1e-4;
    for k in 1..=n_out {
        let r_t = k as f64 * dr;
        if r_t <= r_blend + 2.0 + dr {
            // integrate exactly to the output point
            while r < r_t - 1e-12 {
                let h_try = h.min(r_t - r);
                let (y_new, h_next, ok) = rkf45_step(r, y, h_try, step_tol);
                if ok {
                    r += h_try;
                    y = y_new;
                }
                h = h_next.min(0.05);
                if h < 1e-13 {
                    return Err(ProfileError::ShootingBracketError);
                }
            }
        }
        let (f_as, fp_as) = far_field(r_t);
        let s = smoothstep((r_t - r_blend) / 2.0);
        let (f_v, fp_v) = if r_t <= r_blend {
            (y[0], y[1])
        } else if r_t <= r_blend + 2.0 {
            ((1.0 - s) * y[0] + s * f_as, (1.0 - s) * y[1] + s * fp_as)
        } else {
            (f_as, fp_as)
        };
        samples.push((r_t, f_v, fp_v));
    }
    Ok(RadialProfile { r_max, dr, samples, alpha })
}

impl RadialProfile {
    /// Linear interpolation of f at radius r.
    pub fn f(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let x = (r / self.dr).min((self.samples.len() - 1) as f64);
        let k = (x.floor() as usize).min(self.samples.len() - 2);
        let t = x - k as f64;
        (1.0 - t) * self.samples[k].1 + t * self.samples[k + 1].1
    }
}

/// Normalized core amplitude floor: sqrt(mu) times the minimum of
/// f(r)/r over r <= R sqrt(mu), with the r = 0 value read off the
/// initial slope.
pub fn c_mu(r_cap: f64, mu: f64, profile: &RadialProfile) -> Result<f64, ProfileError> {
    if !(mu > 0.0) || !(r_cap > 0.0) {
        return Err(ProfileError::InvalidRequest(format!(
            "need positive R and mu, got R = {r_cap}, mu = {mu}"
        )));
    }
    let r_lim = r_cap * mu.sqrt();
    if r_lim > profile.r_max {
        return Err(ProfileError::OutOfTable(r_lim, profile.r_max));
    }
    let mut min_ratio = profile.alpha;
    for &(r, f, _) in &profile.samples {
        if r > 0.0 && r <= r_lim {
            min_ratio = min_ratio.min(f / r);
        }
    }
    Ok(mu.sqrt() * min_ratio)
}
