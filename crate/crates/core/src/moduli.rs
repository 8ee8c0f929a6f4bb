//! The manifold of oriented geodesics: chart coordinates `(R, Θ)` and the
//! Finsler indicatrix in each tangent plane.
//!
//! At the chart point `(R, Θ)` the geodesics of the fibre have Clairaut
//! constant `c = sin R` and `λ = cos R`. The indicatrix is parametrized by
//! the fibre parameter `u ∈ [0, 2π)` (`cos r = λ cos u`):
//!
//! ```text
//! v₁ = sin u
//! v₂ = -cos u/λ - h(X)/X + sin u · S(u)/λ                      (parametric)
//!    = -cos u (1 + h(X))/λ - sin² u h'(X) - λ sin u T(u)        (regularized)
//! ```
//!
//! with `X = λ cos u`, `S` as in [`crate::jacobi`] and
//! `T(u) = ∫₀ᵘ sin² w h''(λ cos w) dw`. Eliminating `u` gives the implicit
//! equation `(1 - v₁²)/λ² = (v₂ + W(v₁))²`, see [`ImplicitIndicatrix`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::geodesics::{fiber_parameter, theta_advance, turning_latitude, GeodesicState};
use crate::jacobi::{pole_subtracted, quarter_breaks, REGULARIZE_WINDOW};
use crate::output::{csv, num};
use crate::poly::{
    binomial, rational_from_f64, rational_from_int, rational_to_f64, real_roots, BiPoly,
};
use crate::profile::ZollProfile;
use crate::quadrature::integrate_checked;
use crate::{wrap_angle, Branch, Error, Result};

/// Chart points must satisfy `|R| < π/2 - CHART_MARGIN`.
pub const CHART_MARGIN: f64 = 1e-6;
pub const MIN_CURVE_SAMPLES: usize = 16;

/// Coordinates `(R, Θ)` of an oriented geodesic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuliPoint {
    /// `R ∈ (-π/2, π/2)`.
    pub lat: f64,
    /// `Θ ∈ [0, 2π)`.
    pub lon: f64,
}

impl ModuliPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        check_chart(lat)?;
        Ok(ModuliPoint { lat, lon: wrap_angle(lon) })
    }
}

fn check_chart(lat: f64) -> Result<()> {
    if !(lat.abs() < FRAC_PI_2 - CHART_MARGIN) {
        return Err(Error::InvalidArgument(format!("R = {lat} is outside the chart")));
    }
    Ok(())
}

/// Chart coordinates of the geodesic through `state`:
/// `(r_c, θ₀)` if `c > 0`, `(-r_c, θ₀ + π)` if `c < 0` and `(0, θ₀ - π/2)`
/// for meridians, where `θ₀` is the longitude at the northern turning point
/// (for meridians, the meridian the geodesic leaves the north pole along).
pub fn coords_of_geodesic(profile: &ZollProfile, state: &GeodesicState) -> Result<ModuliPoint> {
    let c = state.c;
    if !(c.abs() < 1.0) {
        return Err(Error::Equator);
    }
    let u = state.fiber_parameter();
    let theta0 = state.theta - theta_advance(profile, c, u)?;
    let rc = turning_latitude(c);
    let (lat, lon) = if c > 0.0 {
        (rc, theta0)
    } else if c < 0.0 {
        (-rc, theta0 + PI)
    } else {
        (0.0, theta0 - FRAC_PI_2)
    };
    Ok(ModuliPoint { lat, lon: wrap_angle(lon) })
}

/// One point `(v₁, v₂)` of the indicatrix at `(R, Θ)`, produced by the
/// geodesic of the fibre through latitude `r` on `branch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatrixSample {
    pub lat: f64,
    pub lon: f64,
    pub branch: Branch,
    pub r: f64,
    pub v1: f64,
    pub v2: f64,
}

/// How `T(u) = ∫₀ᵘ sin² w h''(λ cos w) dw` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HIntegral {
    Quadrature,
    /// `T = λ sin³u Q(sin u)`, exact for polynomial `h`.
    ClosedForm,
}

/// `v₂` and its first two `u`-derivatives from the regularized formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedFiber {
    pub v2: f64,
    pub v2_u: f64,
    pub v2_uu: f64,
}

pub(crate) fn regularized_fiber(
    profile: &ZollProfile,
    lam: f64,
    u: f64,
    method: HIntegral,
) -> Result<RegularizedFiber> {
    let t = match method {
        HIntegral::Quadrature => t_integral(profile, lam, u)?,
        HIntegral::ClosedForm => lam * u.sin().powi(3) * horner_even(&q_coeffs(profile, lam), u.sin()),
    };
    Ok(regularized_from_t(profile, lam, u, t))
}

fn regularized_from_t(profile: &ZollProfile, lam: f64, u: f64, t: f64) -> RegularizedFiber {
    let (su, cu) = u.sin_cos();
    let x = lam * cu;
    let one_h = 1.0 + profile.h(x);
    let dh = profile.dh(x);
    RegularizedFiber {
        v2: -cu * one_h / lam - su * su * dh - lam * su * t,
        v2_u: su * one_h / lam - su * cu * dh - lam * cu * t,
        v2_uu: cu * one_h / lam - cu * cu * dh + lam * su * t,
    }
}

fn t_integral(profile: &ZollProfile, lam: f64, u: f64) -> Result<f64> {
    if profile.is_round() || u == 0.0 {
        return Ok(0.0);
    }
    let est = integrate_checked(&quarter_breaks(u), |w| {
        let (s, c) = w.sin_cos();
        s * s * profile.d2h(lam * c)
    })?;
    Ok(est.value)
}

/// Coefficients `q_ρ` of `Q(v) = Σ_ρ q_ρ v^{2ρ}`:
/// `q_ρ = (-1)^ρ/(2ρ+3) Σ_{k≥ρ} b_{2k+1} λ^{2k} C(k, ρ)`.
pub(crate) fn q_coeffs(profile: &ZollProfile, lam: f64) -> Vec<f64> {
    let b = profile.second_derivative_coeffs();
    let lam2 = lam * lam;
    (0..b.len())
        .map(|rho| {
            let sum: f64 = (rho..b.len())
                .map(|k| b[k] * lam2.powi(k as i32) * binomial(k, rho) as f64)
                .sum();
            let sign = if rho % 2 == 0 { 1.0 } else { -1.0 };
            sign * sum / (2 * rho + 3) as f64
        })
        .collect()
}

fn horner_even(coeffs: &[f64], v: f64) -> f64 {
    let s = v * v;
    coeffs.iter().rev().fold(0.0, |acc, &q| acc * s + q)
}

/// Parametric `v₂` at fibre parameter `u`.
pub fn parametric_v2(profile: &ZollProfile, lam: f64, u: f64) -> Result<f64> {
    let (su, cu) = u.sin_cos();
    let x = lam * cu;
    let s = pole_subtracted(profile, lam, u)?;
    Ok(-cu / lam - profile.h_over_x(x) + su * s / lam)
}

fn chart_lambda(lat: f64) -> Result<f64> {
    check_chart(lat)?;
    Ok(lat.cos())
}

fn band_parameter(lat: f64, r: f64, branch: Branch) -> Result<f64> {
    let rc = turning_latitude(lat.sin());
    if r < rc - 1e-12 || r > PI - rc + 1e-12 || r.is_nan() {
        return Err(Error::OutsideBand { r, lo: rc, hi: PI - rc });
    }
    Ok(fiber_parameter(lat.sin(), r, branch))
}

fn sample(lat: f64, u: f64, branch: Branch, lam: f64, v2: f64) -> IndicatrixSample {
    IndicatrixSample {
        lat,
        lon: 0.0,
        branch,
        r: (lam * u.cos()).clamp(-1.0, 1.0).acos(),
        v1: u.sin(),
        v2,
    }
}

/// The indicatrix point from the parametric equations. Within
/// [`REGULARIZE_WINDOW`] of `r = π/2` the regularized formula is used.
pub fn indicatrix_parametric(
    profile: &ZollProfile,
    lat: f64,
    r: f64,
    branch: Branch,
) -> Result<IndicatrixSample> {
    chart_lambda(lat)?;
    let u = band_parameter(lat, r, branch)?;
    indicatrix_at(profile, lat, u, branch)
}

/// Parametric point at fibre parameter `u`, labelled with `branch`.
pub fn indicatrix_at(profile: &ZollProfile, lat: f64, u: f64, branch: Branch) -> Result<IndicatrixSample> {
    let lam = chart_lambda(lat)?;
    let x = lam * u.cos();
    let v2 = if x.asin().abs() < REGULARIZE_WINDOW {
        regularized_fiber(profile, lam, u, HIntegral::Quadrature)?.v2
    } else {
        parametric_v2(profile, lam, u)?
    };
    Ok(sample(lat, u, branch, lam, v2))
}

pub fn indicatrix_regularized(
    profile: &ZollProfile,
    lat: f64,
    r: f64,
    branch: Branch,
) -> Result<IndicatrixSample> {
    indicatrix_regularized_with(profile, lat, r, branch, HIntegral::Quadrature)
}

pub fn indicatrix_regularized_with(
    profile: &ZollProfile,
    lat: f64,
    r: f64,
    branch: Branch,
    method: HIntegral,
) -> Result<IndicatrixSample> {
    let lam = chart_lambda(lat)?;
    let u = band_parameter(lat, r, branch)?;
    let reg = regularized_fiber(profile, lam, u, method)?;
    Ok(sample(lat, u, branch, lam, reg.v2))
}

/// The closed indicatrix at `R` sampled at `samples` equally spaced fibre
/// parameters, starting at the turning point `r = r_c` and running through
/// the `+` branch to `r = π - r_c` and back along the `-` branch.
///
/// Fails with [`Error::ConvexityViolation`] unless the polygon turns
/// strictly left at every vertex and winds once around the origin.
pub fn indicatrix_curve(profile: &ZollProfile, lat: f64, samples: usize) -> Result<Vec<IndicatrixSample>> {
    let curve = indicatrix_polygon(profile, lat, samples)?;
    check_convex(&curve)?;
    Ok(curve)
}

/// As [`indicatrix_curve`] without the convexity certificate.
pub fn indicatrix_polygon(profile: &ZollProfile, lat: f64, samples: usize) -> Result<Vec<IndicatrixSample>> {
    check_chart(lat)?;
    if samples < MIN_CURVE_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_CURVE_SAMPLES} samples, got {samples}"
        )));
    }
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let u = TAU * i as f64 / samples as f64;
            let branch = if u <= PI { Branch::Plus } else { Branch::Minus };
            indicatrix_at(profile, lat, u, branch)
        })
        .collect()
}

/// Verifies strict left turns at every vertex of the closed polygon and a
/// winding number of one about the origin.
pub fn check_convex(curve: &[IndicatrixSample]) -> Result<()> {
    let n = curve.len();
    let pts: Vec<(f64, f64)> = curve.iter().map(|s| (s.v1, s.v2)).collect();
    for i in 0..n {
        let a = pts[(i + n - 1) % n];
        let b = pts[i];
        let c = pts[(i + 1) % n];
        let cross = (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0);
        if !(cross > 0.0) {
            return Err(Error::ConvexityViolation(format!(
                "turn {cross:e} at vertex {i} (r = {}, branch {})",
                curve[i].r,
                curve[i].branch.as_i32()
            )));
        }
    }
    let w = winding_number(&pts);
    if w != 1 {
        return Err(Error::ConvexityViolation(format!("winding number {w} about the origin")));
    }
    Ok(())
}

/// Winding number of the closed polygon about the origin.
pub fn winding_number(pts: &[(f64, f64)]) -> i32 {
    let n = pts.len();
    let total: f64 = (0..n)
        .map(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            (a.0 * b.1 - a.1 * b.0).atan2(a.0 * b.0 + a.1 * b.1)
        })
        .sum();
    (total / TAU).round() as i32
}

pub fn indicatrix_csv(curve: &[IndicatrixSample]) -> String {
    csv(
        "R,Theta,branch,r,v1,v2",
        curve.iter().map(|s| {
            vec![
                num(s.lat),
                num(s.lon),
                s.branch.as_i32().to_string(),
                num(s.r),
                num(s.v1),
                num(s.v2),
            ]
        }),
    )
}

/// Both sides of `k(r) = (dt/dr)² G`: the curvature quotient
/// `(v̈₁v̇₂ - v̈₂v̇₁)/(v̇₁v₂ - v̇₂v₁)` of the parametrized indicatrix (dots are
/// `d/dr`), and `(dt/dr)² G(r)` from the geodesic flow.
pub fn indicatrix_curvature(profile: &ZollProfile, lat: f64, r: f64, branch: Branch) -> Result<(f64, f64)> {
    chart_lambda(lat)?;
    let u = band_parameter(lat, r, branch)?;
    indicatrix_curvature_at(profile, lat, u)
}

/// [`indicatrix_curvature`] at fibre parameter `u`.
pub fn indicatrix_curvature_at(profile: &ZollProfile, lat: f64, u: f64) -> Result<(f64, f64)> {
    let lam = chart_lambda(lat)?;
    let (su, cu) = u.sin_cos();
    if su.abs() < 1e-9 {
        return Err(Error::InvalidArgument("dt/dr diverges at the turning points".into()));
    }
    let x = lam * cu;
    let s = pole_subtracted(profile, lam, u)?;
    // u-derivatives of the parametric form
    let (v1, v1_u, v1_uu) = (su, cu, -su);
    let v2 = -cu / lam - profile.h_over_x(x) + su * s / lam;
    let v2_u = (su + cu * s) / lam;
    let v2_uu = x * profile.defect_over_x2(x) + cu / lam - su * s / lam;
    let num_u = v1_uu * v2_u - v2_uu * v1_u;
    let den_u = v1_u * v2 - v2_u * v1;
    let sin_r = (1.0 - x * x).sqrt();
    let u_r = sin_r / (lam * su);
    let lhs = u_r * u_r * num_u / den_u;
    let dt_dr = (1.0 + profile.h(x)) * u_r;
    let rhs = dt_dr * dt_dr * profile.curvature_at(x);
    Ok((lhs, rhs))
}

/// The indicatrix at `R` as the zero set of
/// `(1 - v₁²)/λ² - (v₂ + W(v₁))²`, `λ = cos R`, where
/// `W = P(v₁) + λ² v₁⁴ Q(v₁)`,
///
/// ```text
/// P(v₁) = Σ_k a_{2k+1} λ^{2k} (1 + 2k v₁²)(1 - v₁²)^k
/// Q(v₁) = Σ_k b_{2k+1} λ^{2k} Σ_ρ (-1)^ρ/(2ρ+3) C(k,ρ) v₁^{2ρ}
/// ```
///
/// `P`, `Q` and `W` are kept exactly, as rational polynomials in `(v₁, λ)`.
/// The arc `v₂ = -√(1 - v₁²)/λ - W(v₁)` is the part of the indicatrix with
/// `r < π/2`; the `+` root gives `r > π/2`.
#[derive(Debug, Clone)]
pub struct ImplicitIndicatrix {
    lat: f64,
    lam: f64,
    p: BiPoly,
    q: BiPoly,
    w: BiPoly,
    w_num: Vec<f64>,
}

pub fn implicit_polynomial(profile: &ZollProfile, lat: f64) -> Result<ImplicitIndicatrix> {
    let lam = chart_lambda(lat)?;
    let a: Vec<BigRational> = profile.odd_coeffs().iter().map(|&x| rational_from_f64(x)).collect();
    let one = || BigRational::one();
    let one_minus_s2 = BiPoly::constant(one()).add(&BiPoly::monomial(-one(), 2, 0));

    let mut p = BiPoly::zero();
    for (k, ak) in a.iter().enumerate() {
        let factor = BiPoly::constant(one()).add(&BiPoly::monomial(rational_from_int(2 * k as i64), 2, 0));
        let term = factor
            .mul(&one_minus_s2.pow(k))
            .mul(&BiPoly::monomial(ak.clone(), 0, 2 * k));
        p = p.add(&term);
    }

    let mut q = BiPoly::zero();
    for k in 0..a.len().saturating_sub(1) {
        let b = rational_from_int((2 * (k + 1) * (2 * k + 3)) as i64) * &a[k + 1];
        for rho in 0..=k {
            let sign = if rho % 2 == 0 { 1 } else { -1 };
            let coeff = &b
                * BigRational::new(
                    (sign * binomial(k, rho)).into(),
                    ((2 * rho + 3) as i64).into(),
                );
            q.add_term(coeff, 2 * rho, 2 * k);
        }
    }
    let w = p.add(&q.mul(&BiPoly::monomial(one(), 4, 2)));
    let lam_powers: Vec<f64> = (0..=w.max_t_power()).map(|j| lam.powi(j as i32)).collect();
    let w_num = w.coeffs_in_s(&lam_powers);
    Ok(ImplicitIndicatrix { lat, lam, p, q, w, w_num })
}

/// Squared-form residual `(1 - v₁²)/λ² - (v₂ + W(v₁))²` at chart latitude `R`.
pub fn implicit_residual(profile: &ZollProfile, lat: f64, v1: f64, v2: f64) -> Result<f64> {
    Ok(implicit_polynomial(profile, lat)?.residual(v1, v2))
}

impl ImplicitIndicatrix {
    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lambda(&self) -> f64 {
        self.lam
    }

    /// `P` in `(v₁, λ)`.
    pub fn p_poly(&self) -> &BiPoly {
        &self.p
    }

    /// `Q` in `(v₁, λ)`.
    pub fn q_poly(&self) -> &BiPoly {
        &self.q
    }

    /// `W = P + λ² v₁⁴ Q` in `(v₁, λ)`.
    pub fn w_poly(&self) -> &BiPoly {
        &self.w
    }

    /// Degree of `W` in `v₁` (even).
    pub fn w_degree(&self) -> usize {
        self.w.degree_s().unwrap_or(0)
    }

    pub fn w(&self, v1: f64) -> f64 {
        crate::poly::horner(&self.w_num, v1)
    }

    pub fn residual(&self, v1: f64, v2: f64) -> f64 {
        (1.0 - v1 * v1) / (self.lam * self.lam) - (v2 + self.w(v1)).powi(2)
    }

    /// `v₂` on the arc with `r < π/2` (`north`) or `r > π/2`.
    pub fn arc_v2(&self, v1: f64, north: bool) -> f64 {
        let root = (1.0 - v1 * v1).max(0.0).sqrt() / self.lam;
        (if north { -root } else { root }) - self.w(v1)
    }

    /// Exponent `N = max(deg_{v₁} W, 1)` used to clear denominators when
    /// `v` is replaced by `v/F`.
    fn clearing_power(&self) -> usize {
        self.w_degree().max(1)
    }

    /// Degree in `F` of [`f_polynomial`](Self::f_polynomial).
    pub fn f_degree(&self) -> usize {
        2 * self.clearing_power()
    }

    /// Exact coefficients (ascending powers of `F`) of
    /// `λ² A(F)² - F^{2N} + v₁² F^{2N-2}` with
    /// `A = v₂ F^{N-1} + Σ_j w_j v₁^{2j} F^{N-2j}`: the residual at `v/F`
    /// times `-λ² F^{2N}`. The inputs `v₁, v₂, λ` enter as the exact
    /// rationals of their `f64` values.
    pub fn f_polynomial(&self, v1: f64, v2: f64) -> Vec<BigRational> {
        let n = self.clearing_power();
        let lam = rational_from_f64(self.lam);
        let v1r = rational_from_f64(v1);
        let v2r = rational_from_f64(v2);
        let max_t = self.w.max_t_power();
        let mut lam_pows = vec![BigRational::one()];
        for j in 1..=max_t.max(2) {
            let next = &lam_pows[j - 1] * &lam;
            lam_pows.push(next);
        }
        let mut a = vec![BigRational::zero(); n + 1];
        a[n - 1] += &v2r;
        for (&(i, j), coeff) in self.w.terms() {
            // i is even: w_{i/2} v₁^i F^{N-i}
            a[n - i] += coeff * &lam_pows[j] * pow(&v1r, i);
        }
        let mut out = vec![BigRational::zero(); 2 * n + 1];
        for (i, ai) in a.iter().enumerate() {
            for (j, aj) in a.iter().enumerate() {
                out[i + j] += &lam_pows[2] * ai * aj;
            }
        }
        out[2 * n] -= BigRational::one();
        out[2 * n - 2] += pow(&v1r, 2);
        while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        out
    }

    pub fn f_polynomial_f64(&self, v1: f64, v2: f64) -> Vec<f64> {
        self.f_polynomial(v1, v2).iter().map(rational_to_f64).collect()
    }

    /// Positive real roots of the `F`-polynomial, ascending.
    pub fn f_candidates(&self, v1: f64, v2: f64) -> Vec<f64> {
        real_roots(&self.f_polynomial_f64(v1, v2), 1e-7)
            .into_iter()
            .filter(|&f| f > 0.0)
            .collect()
    }
}

fn pow(x: &BigRational, n: usize) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..n {
        out *= x;
    }
    out
}
