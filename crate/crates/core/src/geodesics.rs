//! Geodesic flow of the Zoll metric.
//!
//! Along a geodesic with Clairaut constant `c` write `λ = cos r_c = √(1-c²)`
//! and `cos r = λ cos u`. Then `sin² r = c² + (1-c²) sin² u` and the flow
//! becomes
//!
//! ```text
//! du/dt = 1 / (1 + h(λ cos u)),    dθ/dt = c / (c² cos² u + sin² u),
//! ```
//!
//! which is smooth through the turning points (`u ∈ πℤ`). The sign of `ṙ` is
//! the sign of `sin u`, so it flips automatically at each turning point.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::ode::{Dopri5, Stats};
use crate::output::{csv, num};
use crate::profile::ZollProfile;
use crate::quadrature::{integrate_checked, split_at};
use crate::{wrap_angle, Branch, Error, Result};

/// Slack in the reachability condition `|c| <= sin r`.
pub const REACH_TOL: f64 = 1e-12;
/// `flow_rhs` refuses states with `sin r` below this.
pub const POLE_GUARD: f64 = 1e-9;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 512;

/// A unit tangent vector of the surface: position `(r, θ)`, Clairaut
/// constant `c = sin² r · dθ/dt` and the sign of `ṙ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub r: f64,
    pub theta: f64,
    pub c: f64,
    pub sign: Branch,
}

impl GeodesicState {
    pub fn new(r: f64, theta: f64, c: f64, sign: Branch) -> Result<Self> {
        if !(0.0..=PI).contains(&r) || !theta.is_finite() {
            return Err(Error::InvalidState(format!("position ({r}, {theta}) is not on the sphere")));
        }
        if !(-1.0..=1.0).contains(&c) {
            return Err(Error::InvalidState(format!("|c| = {} exceeds 1", c.abs())));
        }
        if c.abs() > r.sin() + REACH_TOL {
            return Err(Error::InvalidState(format!(
                "|c| = {} exceeds sin r = {}",
                c.abs(),
                r.sin()
            )));
        }
        Ok(GeodesicState {
            r,
            theta: wrap_angle(theta),
            c,
            sign,
        })
    }

    /// The state at the northern turning point `r = r_c`, moving south.
    pub fn at_turning_point(c: f64, theta: f64) -> Result<Self> {
        GeodesicState::new(turning_latitude(c), theta, c, Branch::Plus)
    }

    /// Unit vector at `(r, θ)` making angle `φ` with `∂_r` towards `∂_θ`.
    pub fn from_direction(r: f64, theta: f64, phi: f64) -> Result<Self> {
        let c = (r.sin() * phi.sin()).clamp(-1.0, 1.0);
        GeodesicState::new(r, theta, c, Branch::from_sign(phi.cos()))
    }

    /// Momentum `ξ₁ = sign · (1 + h) · √(1 - c²/sin² r)`.
    pub fn xi1(&self, profile: &ZollProfile) -> f64 {
        let s = self.r.sin();
        let q = if s > 0.0 { (1.0 - (self.c / s).powi(2)).max(0.0) } else { 0.0 };
        self.sign.sign() * (1.0 + profile.h(self.r.cos())) * q.sqrt()
    }

    /// `ξ₁²/(1 + h)² + c²/sin² r`, equal to 1 for unit vectors.
    pub fn energy(&self, profile: &ZollProfile) -> f64 {
        let one_h = 1.0 + profile.h(self.r.cos());
        let s = self.r.sin();
        (self.xi1(profile) / one_h).powi(2) + (self.c / s).powi(2)
    }

    /// `λ = cos r_c`.
    pub fn lambda(&self) -> f64 {
        fiber_lambda(self.c)
    }

    /// The fibre parameter `u ∈ [0, 2π)` with `cos r = λ cos u`; `u ∈ [0, π]`
    /// on the `+` branch.
    pub fn fiber_parameter(&self) -> f64 {
        fiber_parameter(self.c, self.r, self.sign)
    }
}

pub(crate) fn fiber_lambda(c: f64) -> f64 {
    (1.0 - c * c).max(0.0).sqrt()
}

/// `u ∈ [0, 2π)` for latitude `r` on the given branch of a geodesic with
/// Clairaut constant `c`.
pub fn fiber_parameter(c: f64, r: f64, branch: Branch) -> f64 {
    let lam = fiber_lambda(c);
    if lam == 0.0 {
        return FRAC_PI_2;
    }
    let u = (r.cos() / lam).clamp(-1.0, 1.0).acos();
    match branch {
        Branch::Plus => u,
        Branch::Minus if u == 0.0 => 0.0,
        Branch::Minus => TAU - u,
    }
}

/// `r_c = arcsin |c|`.
pub fn turning_latitude(c: f64) -> f64 {
    c.abs().min(1.0).asin()
}

/// `(dr/dt, dθ/dt)` at a state.
pub fn flow_rhs(profile: &ZollProfile, state: &GeodesicState) -> Result<(f64, f64)> {
    let s = state.r.sin();
    if s < POLE_GUARD {
        return Err(Error::PoleProximity { sin_r: s });
    }
    let one_h = 1.0 + profile.h(state.r.cos());
    let q = (1.0 - (state.c / s).powi(2)).max(0.0);
    Ok((state.sign.sign() * q.sqrt() / one_h, state.c / (s * s)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSample {
    pub t: f64,
    pub r: f64,
    /// Wrapped into `[0, 2π)`.
    pub theta: f64,
    pub sign: Branch,
    /// Unwrapped fibre parameter.
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicTrace {
    pub c: f64,
    pub samples: Vec<GeodesicSample>,
    pub stats: Stats,
}

impl GeodesicTrace {
    /// `max |θ̇ sin² r - c|`, with `θ̇` the integrator's right-hand side and
    /// `r` the reported latitude.
    pub fn clairaut_residual(&self) -> f64 {
        let c = self.c;
        let lam = fiber_lambda(c);
        if lam == 0.0 {
            return 0.0;
        }
        self.samples
            .iter()
            .map(|s| {
                let denom = (c * s.u.cos()).powi(2) + s.u.sin().powi(2);
                if c == 0.0 || denom == 0.0 {
                    return 0.0;
                }
                (c / denom * s.r.sin().powi(2) - c).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        csv(
            "t,r,theta,c,sign",
            self.samples.iter().map(|s| {
                vec![num(s.t), num(s.r), num(s.theta), num(self.c), s.sign.as_i32().to_string()]
            }),
        )
    }
}

/// Samples on `[0, t_end]` at [`DEFAULT_SAMPLES_PER_PERIOD`] per `2π`.
pub fn integrate_geodesic(
    profile: &ZollProfile,
    initial: &GeodesicState,
    t_end: f64,
    tol: f64,
) -> Result<GeodesicTrace> {
    let per = (DEFAULT_SAMPLES_PER_PERIOD as f64 * t_end / TAU).ceil() as usize;
    integrate_geodesic_sampled(profile, initial, t_end, tol, per.max(1) + 1)
}

/// Integrates the flow and reports `samples` equally spaced points in `t`,
/// both ends included.
pub fn integrate_geodesic_sampled(
    profile: &ZollProfile,
    initial: &GeodesicState,
    t_end: f64,
    tol: f64,
    samples: usize,
) -> Result<GeodesicTrace> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::InvalidArgument(format!("tolerance {tol:e} outside [1e-12, 1e-4]")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} must be finite and >= 0")));
    }
    if samples < 2 {
        return Err(Error::InvalidArgument("a trace needs at least 2 samples".into()));
    }
    let times: Vec<f64> = (0..samples)
        .map(|i| t_end * i as f64 / (samples - 1) as f64)
        .collect();
    let c = initial.c;
    let lam = fiber_lambda(c);

    if lam == 0.0 {
        let samples = times
            .iter()
            .map(|&t| GeodesicSample {
                t,
                r: FRAC_PI_2,
                theta: wrap_angle(initial.theta + c * t),
                sign: Branch::Plus,
                u: FRAC_PI_2,
            })
            .collect();
        return Ok(GeodesicTrace { c, samples, stats: Stats::default() });
    }

    let u0 = initial.fiber_parameter();
    let rhs = |_t: f64, y: &[f64; 2]| -> Result<[f64; 2]> {
        let (s, co) = y[0].sin_cos();
        let du = 1.0 / (1.0 + profile.h(lam * co));
        let dtheta = if c == 0.0 { 0.0 } else { c / (c * c * co * co + s * s) };
        Ok([du, dtheta])
    };
    let solver = Dopri5::new(tol);
    let mut stats = Stats::default();
    let mut h = 0.0;
    let mut y = [u0, initial.theta];
    let mut out = Vec::with_capacity(samples);
    let mut t_prev = 0.0;
    for &t in &times {
        y = solver.integrate(rhs, t_prev, y, t, &mut h, &mut stats)?;
        t_prev = t;
        let u = y[0];
        let mut theta = y[1];
        if c == 0.0 {
            // meridians jump to the opposite meridian through each pole
            let jumps = (u / PI).floor() - (u0 / PI).floor();
            theta += PI * jumps;
        }
        out.push(GeodesicSample {
            t,
            r: (lam * u.cos()).clamp(-1.0, 1.0).acos(),
            theta: wrap_angle(theta),
            sign: branch_of(u),
            u,
        });
    }
    Ok(GeodesicTrace { c, samples: out, stats })
}

/// Branch of the fibre parameter: `+` on `[0, π)` mod `2π`.
pub fn branch_of(u: f64) -> Branch {
    if u.rem_euclid(TAU) < PI {
        Branch::Plus
    } else {
        Branch::Minus
    }
}

/// Closure integrals of a geodesic: return time `T` from one turning
/// latitude to the other and the longitude advance `Θ_adv` (unsigned).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closure {
    pub time: f64,
    pub advance: f64,
    /// Larger of the two order-64 vs order-128 disagreements.
    pub error: f64,
}

/// `T = ∫₀^π (1 + h(λ cos u)) du` and, with `tan u = |c| tan w`,
/// `Θ_adv = ∫₀^π (1 + h(λ cos u(w))) dw`.
pub fn closure_integrals(profile: &ZollProfile, c: f64) -> Result<Closure> {
    if !(c.abs() < 1.0) {
        return Err(Error::Equator);
    }
    let lam = fiber_lambda(c);
    let time = integrate_checked(&[0.0, FRAC_PI_2, PI], |u| 1.0 + profile.h(lam * u.cos()))?;
    let adv = advance_h_integral(profile, c, PI)?;
    Ok(Closure {
        time: time.value,
        advance: PI + adv.0,
        error: time.error.max(adv.1),
    })
}

/// `∫₀^{w_max} h(λ cos u(w)) dw` for `w_max ∈ [0, π]`, with panels graded
/// towards `w = π/2` where `u(w)` turns over a width of order `|c|`.
fn advance_h_integral(profile: &ZollProfile, c: f64, w_max: f64) -> Result<(f64, f64)> {
    let a = c.abs();
    if a == 0.0 || profile.is_round() || w_max <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let lam = fiber_lambda(c);
    let mut mids = Vec::new();
    let mut d = a.max(1e-12);
    while d < FRAC_PI_2 * 0.5 {
        mids.push(FRAC_PI_2 - d);
        mids.push(FRAC_PI_2 + d);
        d *= 2.0;
    }
    mids.push(FRAC_PI_2);
    mids.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let breaks = split_at(w_max, &mids);
    let est = integrate_checked(&breaks, |w| {
        let (s, co) = w.sin_cos();
        let cu = co / (co * co + a * a * s * s).sqrt();
        profile.h(lam * cu)
    })?;
    Ok((est.value, est.error))
}

/// Signed longitude gained while the fibre parameter runs from `0` to `u`
/// (any real `u >= 0`). For `c = 0` this counts the `π` jumps at the poles
/// passed strictly after the start.
pub fn theta_advance(profile: &ZollProfile, c: f64, u: f64) -> Result<f64> {
    if !(c.abs() < 1.0) {
        return Err(Error::Equator);
    }
    if u < 0.0 {
        return Err(Error::InvalidArgument(format!("fibre parameter {u} < 0")));
    }
    if c == 0.0 {
        return Ok(PI * (u / PI).floor());
    }
    let turns = (u / TAU).floor();
    let m = u - TAU * turns;
    let w_in_turn = (m.sin()).atan2(c.abs() * m.cos()).rem_euclid(TAU);
    let w = TAU * turns + w_in_turn;
    let half_turns = (w / PI).floor();
    // the h-part integrates to zero over each half turn and flips sign
    // from one half turn to the next
    let (hpart, _) = advance_h_integral(profile, c, w - PI * half_turns)?;
    let parity = if half_turns.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
    Ok(c.signum() * (w + parity * hpart))
}

/// Metric length of the short coordinate segment between two nearby points.
pub fn surface_distance(profile: &ZollProfile, a: (f64, f64), b: (f64, f64)) -> f64 {
    let rm = 0.5 * (a.0 + b.0);
    let dr = (1.0 + profile.h(rm.cos())) * (a.0 - b.0);
    let dth = rm.sin() * crate::angle_diff(a.1, b.1);
    dr.hypot(dth)
}
