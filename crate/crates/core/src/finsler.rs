//! The Finsler norm on the manifold of geodesics, its fundamental tensor,
//! the Cartan and Landsberg invariants and the Finsler geodesic flow.
//!
//! `F(v)` is the `t > 0` with `v/t` on the indicatrix. The indicatrix is
//! star-shaped about the origin for every admissible profile (its polar
//! angle increases strictly with the fibre parameter), so `t` is unique and
//! is found by solving for the fibre parameter whose point lies on the ray
//! through `v`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::moduli::{q_coeffs, ModuliPoint, CHART_MARGIN};
use crate::ode::{Dopri5, Stats};
use crate::output::{csv, num};
use crate::profile::ZollProfile;
use crate::{wrap_angle, Error, Result};

/// Relative step of the fundamental-tensor Hessian.
pub const DEFAULT_HESSIAN_STEP: f64 = 1e-3;
/// Sign `σ` relating the fibre rotation `φ` to the flow of `ê₂`:
/// `dI/dφ = σ J`, `dJ/dφ = -σ I`. Fixed by [`calibrate_rotation_sign`].
pub const ROTATION_SIGN: f64 = -1.0;
/// Finsler geodesics abort once `|R| > π/2 - CHART_GUARD`.
pub const CHART_GUARD: f64 = 1e-3;

const RAY_MAX_ITER: usize = 200;
const SPRAY_STEP_LAT: f64 = 1e-5;
const SPRAY_STEP_V: f64 = 1e-5;

/// The indicatrix at one chart latitude in closed form, ready for repeated
/// norm evaluations.
#[derive(Debug, Clone)]
pub struct Indicatrix<'a> {
    profile: &'a ZollProfile,
    lam: f64,
    q: Vec<f64>,
}

impl<'a> Indicatrix<'a> {
    pub fn new(profile: &'a ZollProfile, lat: f64) -> Result<Self> {
        if !(lat.abs() < FRAC_PI_2 - CHART_MARGIN) {
            return Err(Error::InvalidArgument(format!("R = {lat} is outside the chart")));
        }
        let lam = lat.cos();
        Ok(Indicatrix { profile, lam, q: q_coeffs(profile, lam) })
    }

    fn t_closed(&self, su: f64) -> f64 {
        let s2 = su * su;
        let q = self.q.iter().rev().fold(0.0, |acc, &c| acc * s2 + c);
        self.lam * su * s2 * q
    }

    /// `(v₁, v₂)` at fibre parameter `u`.
    pub fn point(&self, u: f64) -> (f64, f64) {
        let (su, cu) = u.sin_cos();
        let x = self.lam * cu;
        let p = self.profile;
        let v2 = -cu * (1.0 + p.h(x)) / self.lam - su * su * p.dh(x) - self.lam * su * self.t_closed(su);
        (su, v2)
    }

    /// `d(v₁, v₂)/du`.
    pub fn tangent(&self, u: f64) -> (f64, f64) {
        let (su, cu) = u.sin_cos();
        let x = self.lam * cu;
        let p = self.profile;
        let v2u = su * (1.0 + p.h(x)) / self.lam - su * cu * p.dh(x) - self.lam * cu * self.t_closed(su);
        (cu, v2u)
    }

    /// Fibre parameter of the indicatrix point on the ray through `v`.
    pub fn ray_parameter(&self, v1: f64, v2: f64) -> Result<f64> {
        if v1 == 0.0 {
            return match v2.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => Ok(PI),
                Some(std::cmp::Ordering::Less) => Ok(0.0),
                _ => Err(Error::InvalidArgument("F is undefined at v = 0".into())),
            };
        }
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite vector ({v1}, {v2})")));
        }
        // g(u) = v × p(u) changes sign exactly once on the half turn facing v
        let g = |u: f64| {
            let (p1, p2) = self.point(u);
            v1 * p2 - v2 * p1
        };
        let (mut lo, mut hi) = if v1 > 0.0 { (0.0, PI) } else { (PI, TAU) };
        // v₁ vanishes exactly at the ends of the half turn
        let (g_lo, g_hi) = (v1 * self.point(lo).1, v1 * self.point(hi).1);
        if !(g_lo <= 0.0 && g_hi >= 0.0) {
            return Err(Error::NoBracket { v1, v2 });
        }
        let mut u = 0.5 * (lo + hi);
        for _ in 0..RAY_MAX_ITER {
            let gu = g(u);
            if gu == 0.0 {
                return Ok(u);
            }
            if gu < 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let (t1, t2) = self.tangent(u);
            let dg = v1 * t2 - v2 * t1;
            let newton = u - gu / dg;
            let next = if dg > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - u).abs() <= 1e-16 * u.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            u = next;
        }
        Ok(u)
    }

    /// `F(v)`.
    pub fn norm(&self, v1: f64, v2: f64) -> Result<f64> {
        let u = self.ray_parameter(v1, v2)?;
        let (p1, p2) = self.point(u);
        Ok(v1.hypot(v2) / p1.hypot(p2))
    }

    /// `(F, ∂F/∂v₁, ∂F/∂v₂)`. The gradient is the conormal of the
    /// indicatrix at `v/F`, normalized by Euler's relation `v · ∇F = F`.
    pub fn norm_with_gradient(&self, v1: f64, v2: f64) -> Result<(f64, f64, f64)> {
        let u = self.ray_parameter(v1, v2)?;
        let (p1, p2) = self.point(u);
        let (t1, t2) = self.tangent(u);
        let f = v1.hypot(v2) / p1.hypot(p2);
        let d = p1 * t2 - p2 * t1;
        Ok((f, t2 / d, -t1 / d))
    }
}

/// `F(v)` at `(R, Θ)`; `Θ` does not enter.
pub fn finsler_f(profile: &ZollProfile, lat: f64, _lon: f64, v: (f64, f64)) -> Result<f64> {
    Indicatrix::new(profile, lat)?.norm(v.0, v.1)
}

/// `F` and `g_ij = ½ ∂²F²/∂vⁱ∂vʲ` at a tangent vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinslerEval {
    pub lat: f64,
    pub lon: f64,
    pub v1: f64,
    pub v2: f64,
    pub f: f64,
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl FinslerEval {
    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn trace(&self) -> f64 {
        self.g11 + self.g22
    }

    pub fn is_positive_definite(&self) -> bool {
        self.det() > 0.0 && self.trace() > 0.0
    }
}

/// Central-difference Hessian of `F²/2` at step `step · |v|`, improved by
/// one Richardson extrapolation against step `2 step · |v|`.
pub fn fundamental_tensor(
    profile: &ZollProfile,
    lat: f64,
    lon: f64,
    v: (f64, f64),
    step: f64,
) -> Result<FinslerEval> {
    if !(1e-8..=1e-1).contains(&step) {
        return Err(Error::BadStep { step });
    }
    let ind = Indicatrix::new(profile, lat)?;
    let norm = v.0.hypot(v.1);
    if norm == 0.0 {
        return Err(Error::InvalidArgument("fundamental tensor at v = 0".into()));
    }
    let e = |a: f64, b: f64| -> Result<f64> { Ok(0.5 * ind.norm(a, b)?.powi(2)) };
    let hessian = |s: f64| -> Result<(f64, f64, f64)> {
        let e0 = e(v.0, v.1)?;
        let g11 = (e(v.0 + s, v.1)? - 2.0 * e0 + e(v.0 - s, v.1)?) / (s * s);
        let g22 = (e(v.0, v.1 + s)? - 2.0 * e0 + e(v.0, v.1 - s)?) / (s * s);
        let g12 = (e(v.0 + s, v.1 + s)? - e(v.0 + s, v.1 - s)? - e(v.0 - s, v.1 + s)?
            + e(v.0 - s, v.1 - s)?)
            / (4.0 * s * s);
        Ok((g11, g12, g22))
    };
    let s = step * norm;
    let fine = hessian(s)?;
    let coarse = hessian(2.0 * s)?;
    let rich = |a: f64, b: f64| (4.0 * a - b) / 3.0;
    Ok(FinslerEval {
        lat,
        lon,
        v1: v.0,
        v2: v.1,
        f: ind.norm(v.0, v.1)?,
        g11: rich(fine.0, coarse.0),
        g12: rich(fine.1, coarse.1),
        g22: rich(fine.2, coarse.2),
    })
}

/// Cartan scalar `I` and Landsberg scalar `J` at a unit vector of the
/// surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantPair {
    pub i: f64,
    pub j: f64,
}

/// `I = ½ G_{θ2}/G^{3/2}` and `J = -½ G_{θ1}/G^{3/2}` for the unit vector at
/// latitude `r` making angle `φ` with `∂_r` (towards `∂_θ`). Since `G`
/// depends on `r` only, `G_{θ1} = G'(r) nʳ` and `G_{θ2} = G'(r) γ̇ʳ` with
/// `γ̇ʳ = cos φ/(1 + h)` and `nʳ = -sin φ/(1 + h)`.
pub fn invariants_ij(profile: &ZollProfile, r: f64, phi: f64) -> Result<InvariantPair> {
    let s = r.sin();
    if s < 1e-9 {
        return Err(Error::PoleProximity { sin_r: s });
    }
    let g = profile.gauss_curvature(r);
    if !(g > 0.0) {
        return Err(Error::InvalidArgument(format!("G(r) = {g} is not positive at r = {r}")));
    }
    let one_h = 1.0 + profile.h(r.cos());
    let scale = 0.5 * profile.gauss_curvature_dr(r) / (one_h * g.powf(1.5));
    Ok(InvariantPair { i: scale * phi.cos(), j: scale * phi.sin() })
}

fn flow_residual(profile: &ZollProfile, r: f64, phi: f64, dphi: f64, sigma: f64) -> Result<f64> {
    let a = invariants_ij(profile, r, phi)?;
    let b = invariants_ij(profile, r, phi + dphi)?;
    let di = (b.i - a.i) / dphi;
    let dj = (b.j - a.j) / dphi;
    Ok((di - sigma * a.j).abs() + (dj + sigma * a.i).abs())
}

/// `|ΔI/Δφ - σJ| + |ΔJ/Δφ + σI|` with `σ =` [`ROTATION_SIGN`]; `O(dφ)`.
pub fn invariant_flow_check(profile: &ZollProfile, r: f64, phi: f64, dphi: f64) -> Result<f64> {
    flow_residual(profile, r, phi, dphi, ROTATION_SIGN)
}

/// The sign `σ ∈ {1, -1}` giving the smaller flow residual at one point,
/// with both residuals `(σ, residual(σ), residual(-σ))`.
pub fn calibrate_rotation_sign(profile: &ZollProfile, r: f64, phi: f64, dphi: f64) -> Result<(f64, f64, f64)> {
    let plus = flow_residual(profile, r, phi, dphi, 1.0)?;
    let minus = flow_residual(profile, r, phi, dphi, -1.0)?;
    Ok(if plus < minus { (1.0, plus, minus) } else { (-1.0, minus, plus) })
}

/// One sample of a Finsler geodesic in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinslerSample {
    pub t: f64,
    pub lat: f64,
    /// Wrapped into `[0, 2π)`.
    pub lon: f64,
    pub v_lat: f64,
    pub v_lon: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinslerTrace {
    pub samples: Vec<FinslerSample>,
    pub stats: Stats,
}

impl FinslerTrace {
    /// `max |F - F(0)|` along the trace.
    pub fn f_drift(&self) -> f64 {
        let f0 = self.samples.first().map_or(0.0, |s| s.f);
        self.samples.iter().map(|s| (s.f - f0).abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        finsler_csv(&self.samples)
    }
}

pub fn finsler_csv(samples: &[FinslerSample]) -> String {
    csv(
        "t,R,Theta,vR,vTheta,F",
        samples.iter().map(|s| vec![num(s.t), num(s.lat), num(s.lon), num(s.v_lat), num(s.v_lon), num(s.f)]),
    )
}

/// The `F = 1` vector along `(cos ψ, sin ψ)` in the `(∂_R, ∂_Θ)` basis.
pub fn unit_vector(profile: &ZollProfile, lat: f64, psi: f64) -> Result<(f64, f64)> {
    let (s, c) = psi.sin_cos();
    let f = Indicatrix::new(profile, lat)?.norm(c, s)?;
    Ok((c / f, s / f))
}

/// Geodesic spray of `E = F²/2` in the chart. With `x = (R, Θ)`, `E` does
/// not depend on `Θ` and Euler–Lagrange reads
/// `g(v) ẍ = ∂E/∂x - (∂²E/∂v∂R) v_R`.
fn spray(profile: &ZollProfile, lat: f64, v: (f64, f64)) -> Result<(f64, f64)> {
    let here = Indicatrix::new(profile, lat)?;
    let north = Indicatrix::new(profile, lat + SPRAY_STEP_LAT)?;
    let south = Indicatrix::new(profile, lat - SPRAY_STEP_LAT)?;
    let grad_e = |ind: &Indicatrix, a: f64, b: f64| -> Result<(f64, f64, f64)> {
        let (f, f1, f2) = ind.norm_with_gradient(a, b)?;
        Ok((0.5 * f * f, f * f1, f * f2))
    };
    let (e_n, p1_n, p2_n) = grad_e(&north, v.0, v.1)?;
    let (e_s, p1_s, p2_s) = grad_e(&south, v.0, v.1)?;
    let two_h = 2.0 * SPRAY_STEP_LAT;
    let de_dlat = (e_n - e_s) / two_h;
    let m1 = (p1_n - p1_s) / two_h;
    let m2 = (p2_n - p2_s) / two_h;

    let s = SPRAY_STEP_V * v.0.hypot(v.1);
    let (_, a1p, a2p) = grad_e(&here, v.0 + s, v.1)?;
    let (_, a1m, a2m) = grad_e(&here, v.0 - s, v.1)?;
    let (_, b1p, b2p) = grad_e(&here, v.0, v.1 + s)?;
    let (_, b1m, b2m) = grad_e(&here, v.0, v.1 - s)?;
    let g11 = (a1p - a1m) / (2.0 * s);
    let g22 = (b2p - b2m) / (2.0 * s);
    let g12 = 0.25 * ((a2p - a2m) + (b1p - b1m)) / s;

    let rhs1 = de_dlat - m1 * v.0;
    let rhs2 = -m2 * v.0;
    let det = g11 * g22 - g12 * g12;
    if !(det > 0.0) {
        return Err(Error::ConvexityViolation(format!(
            "fundamental tensor not positive definite at R = {lat}"
        )));
    }
    Ok(((g22 * rhs1 - g12 * rhs2) / det, (g11 * rhs2 - g12 * rhs1) / det))
}

/// Integrates the Finsler geodesic from `start` with initial velocity `v0`
/// (`F(v0) = 1`), reporting `samples` equally spaced points on `[0, t_end]`.
///
/// Leaving the chart (`|R| > π/2 - CHART_GUARD`) stops the integration with
/// [`Error::ChartExit`], which carries the samples computed so far.
pub fn finsler_geodesic(
    profile: &ZollProfile,
    start: ModuliPoint,
    v0: (f64, f64),
    t_end: f64,
    tol: f64,
    samples: usize,
) -> Result<FinslerTrace> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(Error::InvalidArgument(format!("tolerance {tol:e} outside [1e-12, 1e-4]")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) || samples < 2 {
        return Err(Error::InvalidArgument("need t_end >= 0 and at least 2 samples".into()));
    }
    if start.lat.abs() > FRAC_PI_2 - CHART_GUARD {
        return Err(Error::ChartExit { t: 0.0, lat: start.lat, partial: Vec::new() });
    }
    let f0 = finsler_f(profile, start.lat, start.lon, v0)?;
    if (f0 - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!("initial vector has F = {f0}, expected 1")));
    }
    let rhs = |_t: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        if y[0].abs() > FRAC_PI_2 - CHART_GUARD {
            return Err(Error::ChartExit { t: f64::NAN, lat: y[0], partial: Vec::new() });
        }
        let (a1, a2) = spray(profile, y[0], (y[2], y[3]))?;
        Ok([y[2], y[3], a1, a2])
    };
    let solver = Dopri5::new(tol);
    let mut stats = Stats::default();
    let mut h = 0.0;
    let mut y = [start.lat, start.lon, v0.0, v0.1];
    let mut out: Vec<FinslerSample> = Vec::with_capacity(samples);
    let mut t_prev = 0.0;
    for i in 0..samples {
        let t = t_end * i as f64 / (samples - 1) as f64;
        match solver.integrate(rhs, t_prev, y, t, &mut h, &mut stats) {
            Ok(next) => y = next,
            Err(Error::ChartExit { lat, .. }) => {
                return Err(Error::ChartExit { t: t_prev, lat, partial: out });
            }
            Err(e) => return Err(e),
        }
        t_prev = t;
        out.push(FinslerSample {
            t,
            lat: y[0],
            lon: wrap_angle(y[1]),
            v_lat: y[2],
            v_lon: y[3],
            f: finsler_f(profile, y[0], y[1], (y[2], y[3]))?,
        });
    }
    Ok(FinslerTrace { samples: out, stats })
}

/// Great-circle distance between two chart points viewed as latitude and
/// longitude on the unit sphere.
pub fn chart_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let p = |lat: f64, lon: f64| [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()];
    let (x, y) = (p(a.0, a.1), p(b.0, b.1));
    let chord = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
    2.0 * (0.5 * chord).min(1.0).asin()
}
