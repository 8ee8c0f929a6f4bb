//! Normal Jacobi fields along a Zoll geodesic as explicit functions of the
//! latitude.
//!
//! With `λ = cos r_c`, `X = cos r = λ cos u` and `c₁ = (1 + h(λ))/λ`:
//!
//! ```text
//! y   = λ sin u                    y'   = X / (1 + h(X))
//! y₁  = c₁ y                       y₁'  = c₁ y'
//! y₂  = (cos u + λ h(X)/X - sin u S(u)) / (c₁ λ)
//! y₂' = -(λ sin u + X S(u)) / (c₁ λ² (1 + h(X)))
//! ```
//!
//! where `S(u) = λ² ∫₀ᵘ (h - x h')/x² |_{x = λ cos w} dw`. This is the closed
//! form of `y₂ = 1/y₁' - y₁ ∫₀ᵗ G/(y₁')² ds` once the double pole of the
//! integrand at `r = π/2` (where `y₁' = 0`) is subtracted: the pole has zero
//! residue, so the integral continues past it as its finite part
//! `(tan u + S(u)) / (c₁ λ)²`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geodesics::{fiber_lambda, fiber_parameter, turning_latitude};
use crate::moduli::{regularized_fiber, HIntegral};
use crate::profile::ZollProfile;
use crate::quadrature::integrate_checked;
use crate::{Branch, Error, Result};

/// Within this distance of `r = π/2`, `y₂` comes from the regularized
/// indicatrix formula instead of the pole-subtracted one.
pub const REGULARIZE_WINDOW: f64 = 1e-3;
/// Slack on the band `[r_c, π - r_c]`.
pub const BAND_SLACK: f64 = 1e-12;

/// `(y, dy/dt)` with `y = sign · √(sin² r - c²)`.
pub fn jacobi_y(profile: &ZollProfile, c: f64, r: f64, sign: Branch) -> Result<(f64, f64)> {
    check_band(c, r)?;
    let y = sign.sign() * (r.sin().powi(2) - c * c).max(0.0).sqrt();
    let x = r.cos();
    Ok((y, x / (1.0 + profile.h(x))))
}

/// Values and `t`-derivatives of the normalized pair with
/// `y₁(0) = 0, y₁'(0) = 1, y₂(0) = 1, y₂'(0) = 0` at the turning point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiPair {
    pub y1: f64,
    pub dy1: f64,
    pub y2: f64,
    pub dy2: f64,
}

impl JacobiPair {
    /// `y₁ y₂' - y₂ y₁'`, identically `-1`.
    pub fn wronskian(&self) -> f64 {
        self.y1 * self.dy2 - self.y2 * self.dy1
    }
}

/// `c₁ = (1 + h(cos r_c)) / cos r_c`.
pub fn normalization(profile: &ZollProfile, c: f64) -> Result<f64> {
    let lam = fiber_lambda(c);
    if lam == 0.0 {
        return Err(Error::Equator);
    }
    Ok((1.0 + profile.h(lam)) / lam)
}

pub fn jacobi_pair(profile: &ZollProfile, c: f64, r: f64, sign: Branch) -> Result<JacobiPair> {
    if !(c.abs() < 1.0) {
        return Err(Error::Equator);
    }
    check_band(c, r)?;
    jacobi_pair_at(profile, c, fiber_parameter(c, r, sign))
}

/// The pair at fibre parameter `u` (`cos r = λ cos u`).
pub fn jacobi_pair_at(profile: &ZollProfile, c: f64, u: f64) -> Result<JacobiPair> {
    let lam = fiber_lambda(c);
    if lam == 0.0 {
        return Err(Error::Equator);
    }
    let c1 = (1.0 + profile.h(lam)) / lam;
    let (su, cu) = u.sin_cos();
    let x = lam * cu;
    let one_h = 1.0 + profile.h(x);
    let y1 = c1 * lam * su;
    let dy1 = c1 * x / one_h;
    let (y2, dy2) = if x.asin().abs() < REGULARIZE_WINDOW {
        let reg = regularized_fiber(profile, lam, u, HIntegral::Quadrature)?;
        (-reg.v2 / c1, -reg.v2_u / (c1 * one_h))
    } else {
        let s = pole_subtracted(profile, lam, u)?;
        (
            (cu + lam * profile.h_over_x(x) - su * s) / (c1 * lam),
            -(lam * su + x * s) / (c1 * lam * lam * one_h),
        )
    };
    Ok(JacobiPair { y1, dy1, y2, dy2 })
}

/// Finite part of `∫₀ᵗ G(γ(s)) / y₁'(s)² ds`, i.e. `(tan u + S(u)) / (c₁ λ)²`.
/// Undefined exactly at `r = π/2`, where the integral has its pole.
pub fn curvature_integral(profile: &ZollProfile, c: f64, r: f64, sign: Branch) -> Result<f64> {
    let c1 = normalization(profile, c)?;
    check_band(c, r)?;
    let lam = fiber_lambda(c);
    let u = fiber_parameter(c, r, sign);
    if (lam * u.cos()).abs() < 1e-12 {
        return Err(Error::InvalidArgument("the curvature integral has a pole at r = π/2".into()));
    }
    let s = pole_subtracted(profile, lam, u)?;
    Ok((u.tan() + s) / (c1 * lam).powi(2))
}

/// `S(u) = λ² ∫₀ᵘ (h(x) - x h'(x))/x² dw` with `x = λ cos w`; the integrand is
/// a polynomial in `cos w`.
pub(crate) fn pole_subtracted(profile: &ZollProfile, lam: f64, u: f64) -> Result<f64> {
    if profile.is_round() || u == 0.0 {
        return Ok(0.0);
    }
    let breaks = quarter_breaks(u);
    let est = integrate_checked(&breaks, |w| profile.defect_over_x2(lam * w.cos()))?;
    Ok(lam * lam * est.value)
}

/// `[0, u]` split at the multiples of `π/2` it contains.
pub(crate) fn quarter_breaks(u: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut k = 1.0;
    while k * FRAC_PI_2 < u {
        breaks.push(k * FRAC_PI_2);
        k += 1.0;
    }
    breaks.push(u);
    breaks
}

/// Largest `|y'' + G y|` over `r_grid` for `y ∈ {y₁, y₂}` on one branch.
/// `t`-derivatives come from central differences in `r` with step `step`,
/// through `y'' = ṙ² y_rr + r̈ y_r` and `ṙ² = (1 - c²/sin² r) / (1 + h)²`.
pub fn jacobi_ode_check(
    profile: &ZollProfile,
    c: f64,
    r_grid: &[f64],
    sign: Branch,
    step: f64,
) -> Result<f64> {
    if !(1e-6..=1e-2).contains(&step) {
        return Err(Error::BadStep { step });
    }
    let rc = turning_latitude(c);
    let rdot2 = |r: f64| {
        let one_h = 1.0 + profile.h(r.cos());
        (1.0 - (c / r.sin()).powi(2)) / (one_h * one_h)
    };
    let mut worst = 0.0f64;
    for &r in r_grid {
        if r - step <= rc || r + step >= PI - rc {
            return Err(Error::OutsideBand { r, lo: rc + step, hi: PI - rc - step });
        }
        let lo = jacobi_pair(profile, c, r - step, sign)?;
        let mid = jacobi_pair(profile, c, r, sign)?;
        let hi = jacobi_pair(profile, c, r + step, sign)?;
        let v = rdot2(r);
        let rddot = (rdot2(r + step) - rdot2(r - step)) / (4.0 * step);
        let g = profile.gauss_curvature(r);
        for (a, b, m) in [(lo.y1, hi.y1, mid.y1), (lo.y2, hi.y2, mid.y2)] {
            let yr = (b - a) / (2.0 * step);
            let yrr = (b - 2.0 * m + a) / (step * step);
            worst = worst.max((v * yrr + rddot * yr + g * m).abs());
        }
    }
    Ok(worst)
}

fn check_band(c: f64, r: f64) -> Result<()> {
    let rc = turning_latitude(c);
    if r < rc - BAND_SLACK || r > PI - rc + BAND_SLACK || r.is_nan() {
        return Err(Error::OutsideBand { r, lo: rc, hi: PI - rc });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{Dopri5, Stats};

    fn profiles() -> Vec<ZollProfile> {
        vec![
            ZollProfile::round_sphere(),
            ZollProfile::example_one(0.25).unwrap(),
            ZollProfile::example_one(0.45).unwrap(),
            ZollProfile::example_two(),
        ]
    }

    #[test]
    fn y_examples() {
        let p = ZollProfile::example_one(0.25).unwrap();
        let (y, _) = jacobi_y(&p, 0.5, PI / 6.0, Branch::Plus).unwrap();
        assert!(y.abs() < 1e-8);
        let (y, _) = jacobi_y(&p, 0.5, FRAC_PI_2, Branch::Plus).unwrap();
        assert!((y - 0.75f64.sqrt()).abs() < 1e-15);
        let round = ZollProfile::round_sphere();
        let (y, dy) = jacobi_y(&round, 0.0, 0.8, Branch::Plus).unwrap();
        assert!((y - 0.8f64.sin()).abs() < 1e-15 && (dy - 0.8f64.cos()).abs() < 1e-15);
        assert!(matches!(jacobi_y(&p, 0.5, 0.3, Branch::Plus), Err(Error::OutsideBand { .. })));
    }

    #[test]
    fn initial_conditions() {
        for p in &profiles() {
            for &c in &[0.0, 0.3, -0.6, 0.9] {
                let jp = jacobi_pair(p, c, turning_latitude(c), Branch::Plus).unwrap();
                assert!(jp.y1.abs() < 1e-15);
                assert!((jp.dy1 - 1.0).abs() < 1e-14);
                assert!((jp.y2 - 1.0).abs() < 1e-12);
                assert!(jp.dy2.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn round_sphere_closed_form() {
        let round = ZollProfile::round_sphere();
        for i in 0..40 {
            let u = 0.05 + i as f64 * 0.155;
            let jp = jacobi_pair_at(&round, 0.0, u).unwrap();
            assert!((jp.y1 - u.sin()).abs() < 1e-14);
            assert!((jp.y2 - u.cos()).abs() < 1e-12, "u={u}");
            assert!((jp.dy2 + u.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn wronskian_is_constant() {
        for p in &profiles() {
            for k in 1..10 {
                let c = k as f64 / 10.0;
                let rc = turning_latitude(c);
                for i in 0..=40 {
                    let r = rc + (PI - 2.0 * rc) * i as f64 / 40.0;
                    for sign in [Branch::Plus, Branch::Minus] {
                        let w = jacobi_pair(p, c, r, sign).unwrap().wronskian();
                        assert!((w + 1.0).abs() < 1e-9, "c={c} r={r}: {w}");
                    }
                }
            }
        }
        let w = jacobi_pair(&ZollProfile::example_two(), 0.3, 1.2, Branch::Plus).unwrap().wronskian();
        assert!((w + 1.0).abs() < 1e-9);
    }

    #[test]
    fn regularized_window_is_continuous() {
        let p = ZollProfile::example_two();
        let c = 0.4;
        let lam = fiber_lambda(c);
        let u_edge = (REGULARIZE_WINDOW.sin() / lam).acos();
        let inside = jacobi_pair_at(&p, c, u_edge + 1e-9).unwrap();
        let outside = jacobi_pair_at(&p, c, u_edge - 1e-9).unwrap();
        assert!((inside.y2 - outside.y2).abs() < 1e-8);
        assert!((inside.dy2 - outside.dy2).abs() < 1e-8);
    }

    #[test]
    fn ode_residuals() {
        let grid = |c: f64| -> Vec<f64> {
            let rc = turning_latitude(c);
            (1..20).map(|i| rc + 0.05 + (PI - 2.0 * rc - 0.1) * i as f64 / 20.0).collect()
        };
        let round = ZollProfile::round_sphere();
        assert!(jacobi_ode_check(&round, 0.0, &grid(0.0), Branch::Plus, 1e-4).unwrap() < 1e-6);
        let p = ZollProfile::example_one(0.25).unwrap();
        assert!(jacobi_ode_check(&p, 0.5, &grid(0.5), Branch::Plus, 1e-4).unwrap() < 1e-5);
        assert!(jacobi_ode_check(&p, 0.5, &grid(0.5), Branch::Minus, 1e-4).unwrap() < 1e-5);
        let q = ZollProfile::example_two();
        assert!(jacobi_ode_check(&q, 0.7, &grid(0.7), Branch::Plus, 1e-4).unwrap() < 1e-5);
        assert!(jacobi_ode_check(&q, 0.7, &[0.5], Branch::Plus, 1e-4).is_err());
    }

    #[test]
    fn matches_integrated_jacobi_equation() {
        // oracle: y'' = -G y integrated in t along the geodesic, u carried along
        let p = ZollProfile::example_two();
        let c: f64 = 0.35;
        let lam = fiber_lambda(c);
        let solver = Dopri5::new(1e-12);
        let rhs = |_t: f64, s: &[f64; 5]| -> Result<[f64; 5]> {
            let x = lam * s[0].cos();
            let g = p.curvature_at(x);
            Ok([1.0 / (1.0 + p.h(x)), s[2], -g * s[1], s[4], -g * s[3]])
        };
        let mut state = [0.0, 0.0, 1.0, 1.0, 0.0];
        let mut h = 0.0;
        let mut t = 0.0;
        for k in 1..=12 {
            let t1 = k as f64 * 0.5;
            state = solver.integrate(rhs, t, state, t1, &mut h, &mut Stats::default()).unwrap();
            t = t1;
            let jp = jacobi_pair_at(&p, c, state[0]).unwrap();
            assert!((jp.y1 - state[1]).abs() < 1e-8, "t={t}");
            assert!((jp.dy1 - state[2]).abs() < 1e-8);
            assert!((jp.y2 - state[3]).abs() < 1e-8, "t={t}: {} vs {}", jp.y2, state[3]);
            assert!((jp.dy2 - state[4]).abs() < 1e-8);
        }
    }

    #[test]
    fn curvature_integral_is_finite_part() {
        let p = ZollProfile::example_one(0.25).unwrap();
        let c = 0.5;
        let c1 = normalization(&p, c).unwrap();
        // y₂ = 1/y₁' - y₁ I
        for &r in &[0.8, 1.2, 2.0, 2.5] {
            let jp = jacobi_pair(&p, c, r, Branch::Plus).unwrap();
            let i = curvature_integral(&p, c, r, Branch::Plus).unwrap();
            assert!((jp.y2 - (1.0 / jp.dy1 - jp.y1 * i)).abs() < 1e-12);
            assert!((jp.dy2 + jp.dy1 * i).abs() < 1e-12);
        }
        assert!(c1 > 0.0);
        assert!(normalization(&p, 1.0).is_err());
    }
}
