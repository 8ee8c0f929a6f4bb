//! Odd polynomial profiles `h` and the pointwise geometry of the Zoll metric
//! `g = (1 + h(cos r))² dr² + sin² r dθ²` they define.

use std::f64::consts::PI;

use crate::poly::sign_change_roots;
use crate::{Error, Result};

/// Allowed `|h(1)|` (equivalently `|Σ a_{2k+1}|`).
pub const SUM_TOL: f64 = 1e-12;
/// Slack on `|x| <= 1` accepted by the checked evaluators.
pub const DOMAIN_SLACK: f64 = 1e-12;
/// Grid size for the `|h| < 1` and `G > 0` scans over `[-1, 1]`.
pub const SCAN_POINTS: usize = 10_000;

/// `h(x) = Σ_k a_{2k+1} x^{2k+1}` with `h(±1) = 0` and `|h| < 1` on `[-1, 1]`.
///
/// Only the odd coefficients are stored, so oddness holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ZollProfile {
    odd_coeffs: Vec<f64>,
}

impl ZollProfile {
    /// Validates and builds a profile from `a_1, a_3, …` in ascending order.
    /// An empty list is the round sphere `h = 0`.
    pub fn new(odd_coeffs: Vec<f64>) -> Result<Self> {
        if let Some(bad) = odd_coeffs.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidProfile(format!("non-finite coefficient {bad}")));
        }
        let sum: f64 = odd_coeffs.iter().sum();
        if sum.abs() > SUM_TOL {
            return Err(Error::InvalidProfile(format!(
                "coefficients sum to {sum:e}, so h(1) != 0"
            )));
        }
        let profile = ZollProfile { odd_coeffs };
        let (x, hx) = profile.max_abs_h();
        if hx.abs() >= 1.0 {
            return Err(Error::InvalidProfile(format!(
                "|h| reaches {:.6} at x = {x:.6}; the metric needs |h| < 1",
                hx.abs()
            )));
        }
        Ok(profile)
    }

    pub fn round_sphere() -> Self {
        ZollProfile { odd_coeffs: Vec::new() }
    }

    /// `h(x) = ε(1 - x²)x`.
    pub fn example_one(eps: f64) -> Result<Self> {
        ZollProfile::new(vec![eps, -eps])
    }

    /// `h(x) = x(1 - x²)²`.
    pub fn example_two() -> Self {
        ZollProfile::new(vec![1.0, -2.0, 1.0]).expect("x(1-x^2)^2 is a valid profile")
    }

    /// Parses the comma-separated literal used on the command line, e.g.
    /// `0.25,-0.25` for `0.25x - 0.25x³`. Blank input is `h = 0`.
    pub fn parse(literal: &str) -> Result<Self> {
        let trimmed = literal.trim();
        if trimmed.is_empty() {
            return Ok(ZollProfile::round_sphere());
        }
        let coeffs = trimmed
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidProfile(format!("cannot parse coefficient {tok:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ZollProfile::new(coeffs)
    }

    pub fn odd_coeffs(&self) -> &[f64] {
        &self.odd_coeffs
    }

    /// True when every coefficient vanishes.
    pub fn is_round(&self) -> bool {
        self.odd_coeffs.iter().all(|&a| a == 0.0)
    }

    /// `b_{2k+1} = 2(k+1)(2k+3) a_{2k+3}`, so that `h''(x) = Σ_k b_{2k+1} x^{2k+1}`.
    pub fn second_derivative_coeffs(&self) -> Vec<f64> {
        self.odd_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &a)| {
                let k = (k - 1) as f64;
                2.0 * (k + 1.0) * (2.0 * k + 3.0) * a
            })
            .collect()
    }

    pub fn eval_h(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.h(x))
    }

    /// `(h'(x), h''(x))`.
    pub fn eval_h_derivs(&self, x: f64) -> Result<(f64, f64)> {
        check_domain(x)?;
        Ok((self.dh(x), self.d2h(x)))
    }

    // Unchecked evaluators. Horner in s = x².

    pub fn h(&self, x: f64) -> f64 {
        x * self.h_over_x(x)
    }

    /// `h(x) / x = Σ a_{2k+1} x^{2k}`, regular at 0.
    pub fn h_over_x(&self, x: f64) -> f64 {
        let s = x * x;
        self.odd_coeffs.iter().rev().fold(0.0, |acc, &a| acc * s + a)
    }

    pub fn dh(&self, x: f64) -> f64 {
        let s = x * x;
        self.odd_coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &a)| acc * s + (2 * k + 1) as f64 * a)
    }

    pub fn d2h(&self, x: f64) -> f64 {
        let s = x * x;
        let inner = self
            .odd_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &a)| acc * s + (2 * k * (2 * k + 1)) as f64 * a);
        x * inner
    }

    /// `(h(x) - x h'(x)) / x² = -Σ_k 2k a_{2k+1} x^{2k-1}`, regular at 0.
    pub fn defect_over_x2(&self, x: f64) -> f64 {
        let s = x * x;
        let inner = self
            .odd_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &a)| acc * s - (2 * k) as f64 * a);
        x * inner
    }

    /// Gauss curvature as a function of `x = cos r`:
    /// `G = (1 + h - x h') / (1 + h)³`.
    pub fn curvature_at(&self, x: f64) -> f64 {
        let one_h = 1.0 + self.h(x);
        (one_h - x * self.dh(x)) / (one_h * one_h * one_h)
    }

    /// `dG/dx`.
    pub fn curvature_slope_at(&self, x: f64) -> f64 {
        let one_h = 1.0 + self.h(x);
        let dh = self.dh(x);
        let p = one_h - x * dh;
        let dp = -x * self.d2h(x);
        (dp * one_h - 3.0 * dh * p) / one_h.powi(4)
    }

    pub fn gauss_curvature(&self, r: f64) -> f64 {
        self.curvature_at(r.cos())
    }

    /// `dG/dr = -sin r · dG/dx`.
    pub fn gauss_curvature_dr(&self, r: f64) -> f64 {
        -r.sin() * self.curvature_slope_at(r.cos())
    }

    /// Interior critical points of `x ↦ G(x)` on `[-1, 1]`, as `(x, G(x))`.
    pub fn curvature_critical_points(&self) -> Vec<(f64, f64)> {
        if self.is_round() {
            return Vec::new();
        }
        sign_change_roots(|x| self.curvature_slope_at(x), -1.0, 1.0, SCAN_POINTS)
            .into_iter()
            .filter(|x| x.abs() < 1.0)
            .map(|x| (x, self.curvature_at(x)))
            .collect()
    }

    /// Locates `min G` over `[-1, 1]` from the endpoints and the refined
    /// critical points, and reports whether it is positive.
    pub fn check_positive_curvature(&self) -> CurvatureCheck {
        let mut best = (-1.0, self.curvature_at(-1.0));
        let mut consider = |x: f64, g: f64| {
            if g < best.1 {
                best = (x, g);
            }
        };
        consider(1.0, self.curvature_at(1.0));
        for i in 0..=SCAN_POINTS {
            let x = -1.0 + 2.0 * i as f64 / SCAN_POINTS as f64;
            consider(x, self.curvature_at(x));
        }
        for (x, g) in self.curvature_critical_points() {
            consider(x, g);
        }
        CurvatureCheck {
            positive: best.1 > 0.0,
            x_min: best.0,
            g_min: best.1,
        }
    }

    /// `(g_rr, g_θθ) = ((1 + h(cos r))², sin² r)`.
    pub fn metric_coeffs(&self, r: f64) -> Result<(f64, f64)> {
        if r <= 0.0 || r >= PI {
            return Err(Error::DegenerateMetric { r });
        }
        let one_h = 1.0 + self.h(r.cos());
        let s = r.sin();
        Ok((one_h * one_h, s * s))
    }

    /// Gauss curvature of the warped metric from finite differences of
    /// [`metric_coeffs`](Self::metric_coeffs) alone:
    /// `K = -1/√(g_rr g_θθ) · d/dr( (d√g_θθ/dr) / √g_rr )`.
    pub fn curvature_fd_check(&self, r: f64, step: f64) -> Result<f64> {
        if !(1e-6..=1e-2).contains(&step) {
            return Err(Error::BadStep { step });
        }
        if r <= 2.0 * step || r >= PI - 2.0 * step {
            return Err(Error::InvalidArgument(format!(
                "r = {r} too close to a pole for step {step}"
            )));
        }
        let roots = |r: f64| -> Result<(f64, f64)> {
            let (grr, gtt) = self.metric_coeffs(r)?;
            Ok((grr.sqrt(), gtt.sqrt()))
        };
        let inner = |r: f64| -> Result<f64> {
            let (_, ahead) = roots(r + step)?;
            let (_, behind) = roots(r - step)?;
            let (e, _) = roots(r)?;
            Ok((ahead - behind) / (2.0 * step) / e)
        };
        let (e, g) = roots(r)?;
        let d_inner = (inner(r + step)? - inner(r - step)?) / (2.0 * step);
        Ok(-d_inner / (e * g))
    }

    fn max_abs_h(&self) -> (f64, f64) {
        let mut best = (0.0, 0.0);
        let mut consider = |x: f64| {
            let v = self.h(x);
            if v.abs() > f64::abs(best.1) {
                best = (x, v);
            }
        };
        for i in 0..=SCAN_POINTS {
            consider(-1.0 + 2.0 * i as f64 / SCAN_POINTS as f64);
        }
        if !self.is_round() {
            for x in sign_change_roots(|x| self.dh(x), -1.0, 1.0, SCAN_POINTS) {
                consider(x);
            }
        }
        best
    }
}

/// Outcome of [`ZollProfile::check_positive_curvature`], with the located
/// minimum `(x_min, G(x_min))` as witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureCheck {
    pub positive: bool,
    pub x_min: f64,
    pub g_min: f64,
}

/// A point `(r, θ)` of the sphere in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub r: f64,
    pub theta: f64,
}

impl SurfacePoint {
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&r) {
            return Err(Error::InvalidArgument(format!("r = {r} outside [0, π]")));
        }
        Ok(SurfacePoint {
            r,
            theta: crate::wrap_angle(theta),
        })
    }

    pub fn is_pole(&self) -> bool {
        self.r == 0.0 || self.r == PI
    }
}

fn check_domain(x: f64) -> Result<()> {
    if x.abs() > 1.0 + DOMAIN_SLACK || x.is_nan() {
        Err(Error::Domain { x })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_one_closed_form(eps: f64, x: f64) -> f64 {
        -(2.0 * eps * x.powi(3) + 1.0) / (eps * x.powi(3) - eps * x - 1.0).powi(3)
    }

    #[test]
    fn eval_h_examples() {
        let p = ZollProfile::example_one(0.25).unwrap();
        assert_eq!(p.eval_h(0.0).unwrap(), 0.0);
        assert!(p.eval_h(1.0).unwrap().abs() <= 1e-12);
        assert!(p.eval_h(-1.0).unwrap().abs() <= 1e-12);
        // x(1-x²)² at 1/2, summed term by term
        let q = ZollProfile::example_two();
        let x: f64 = 0.5;
        let oracle = x - 2.0 * x.powi(3) + x.powi(5);
        assert_eq!(oracle, 0.28125);
        assert!((q.eval_h(x).unwrap() - 0.28125).abs() < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let p = ZollProfile::example_one(0.25).unwrap();
        assert!((p.eval_h_derivs(0.0).unwrap().0 - 0.25).abs() < 1e-15);
        let q = ZollProfile::example_two();
        assert!((q.eval_h_derivs(1.0).unwrap().1 - 8.0).abs() < 1e-14);
        assert_eq!(q.eval_h_derivs(0.0).unwrap().1, 0.0);
        assert_eq!(p.second_derivative_coeffs(), vec![-1.5]);
        assert_eq!(q.second_derivative_coeffs(), vec![-12.0, 20.0]);
    }

    #[test]
    fn domain_errors() {
        let p = ZollProfile::example_two();
        assert!(matches!(p.eval_h(1.0 + 1e-9), Err(Error::Domain { .. })));
        assert!(p.eval_h(1.0 + 1e-13).is_ok());
        assert!(p.eval_h_derivs(-2.0).is_err());
    }

    #[test]
    fn construction_rejects_bad_profiles() {
        // h(1) = 0.1
        assert!(ZollProfile::new(vec![0.3, -0.2]).is_err());
        // 3(x - x³) peaks at 2/√3 > 1
        assert!(ZollProfile::new(vec![3.0, -3.0]).is_err());
        assert!(ZollProfile::new(vec![f64::NAN]).is_err());
        assert!(ZollProfile::new(vec![0.6, -0.6]).is_ok());
    }

    #[test]
    fn parse_literals() {
        assert_eq!(ZollProfile::parse("0.25,-0.25").unwrap().odd_coeffs(), &[0.25, -0.25]);
        assert_eq!(ZollProfile::parse(" 1, -2 ,1").unwrap(), ZollProfile::example_two());
        assert!(ZollProfile::parse("0").unwrap().is_round());
        assert!(ZollProfile::parse("").unwrap().is_round());
        assert!(ZollProfile::parse("a,b").is_err());
    }

    #[test]
    fn curvature_examples() {
        let p = ZollProfile::example_one(0.25).unwrap();
        assert!((p.curvature_at(-1.0) - 0.5).abs() < 1e-14);
        assert!((p.curvature_at(0.0) - 1.0).abs() < 1e-15);
        let round = ZollProfile::round_sphere();
        for r in [0.1, 1.0, 2.5] {
            assert_eq!(round.gauss_curvature(r), 1.0);
        }
    }

    #[test]
    fn example_one_curvature_matches_closed_form() {
        for eps in [0.25, 0.45] {
            let p = ZollProfile::example_one(eps).unwrap();
            for i in 0..100 {
                let x = -1.0 + 2.0 * (i as f64 + 0.5) / 100.0;
                let g = p.gauss_curvature(x.acos());
                assert!((g - example_one_closed_form(eps, x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn positivity_check() {
        let q = ZollProfile::example_two().check_positive_curvature();
        assert!(q.positive);
        assert!((q.x_min + 0.81).abs() < 0.01 && (q.g_min - 0.36).abs() < 0.01, "{q:?}");
        assert!(ZollProfile::example_one(0.45).unwrap().check_positive_curvature().positive);
        let bad = ZollProfile::example_one(0.6).unwrap().check_positive_curvature();
        assert!(!bad.positive);
        assert_eq!(bad.x_min, -1.0);
        assert!((bad.g_min + 0.2).abs() < 1e-12);
    }

    #[test]
    fn example_two_critical_values() {
        let crit = ZollProfile::example_two().curvature_critical_points();
        let expected = [(-0.81, 0.36), (-0.35, 2.18), (0.33, 0.56), (0.88, 1.42)];
        assert_eq!(crit.len(), expected.len());
        for ((x, g), (ex, eg)) in crit.iter().zip(expected) {
            assert!((x - ex).abs() <= 0.01 && (g - eg).abs() <= 0.01, "({x}, {g})");
        }
    }

    #[test]
    fn metric_coefficient_examples() {
        let round = ZollProfile::round_sphere();
        let (a, b) = round.metric_coeffs(PI / 2.0).unwrap();
        assert!((a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let p = ZollProfile::example_one(0.25).unwrap();
        let (a, b) = p.metric_coeffs(PI / 2.0).unwrap();
        assert!((a - 1.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let q = ZollProfile::example_two();
        let (a, b) = q.metric_coeffs(PI / 3.0).unwrap();
        assert!((a - 1.28125f64.powi(2)).abs() < 1e-14);
        assert!((b - 0.75).abs() < 1e-15);
        assert!(matches!(q.metric_coeffs(0.0), Err(Error::DegenerateMetric { .. })));
        assert!(q.metric_coeffs(PI).is_err());
    }

    #[test]
    fn finite_difference_curvature() {
        let profiles = [
            ZollProfile::round_sphere(),
            ZollProfile::example_one(0.25).unwrap(),
            ZollProfile::example_one(0.45).unwrap(),
            ZollProfile::example_two(),
        ];
        for p in &profiles {
            for i in 1..=100 {
                let r = 0.05 + (PI - 0.1) * i as f64 / 101.0;
                let fd = p.curvature_fd_check(r, 1e-4).unwrap();
                let g = p.gauss_curvature(r);
                assert!((fd - g).abs() / g.abs().max(1.0) < 1e-6, "r={r}: {fd} vs {g}");
            }
        }
        assert!(ZollProfile::example_two().curvature_fd_check(1.2, 1e-1).is_err());
        assert!(ZollProfile::example_two().curvature_fd_check(1e-4, 1e-4).is_err());
    }

    #[test]
    fn slope_matches_finite_difference() {
        let q = ZollProfile::example_two();
        for x in [-0.9, -0.2, 0.4, 0.95] {
            let d = 1e-6;
            let fd = (q.curvature_at(x + d) - q.curvature_at(x - d)) / (2.0 * d);
            assert!((fd - q.curvature_slope_at(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn regular_quotients() {
        let q = ZollProfile::example_two();
        for x in [-0.7, 0.3, 0.9] {
            assert!((q.h_over_x(x) - q.h(x) / x).abs() < 1e-14);
            let direct = (q.h(x) - x * q.dh(x)) / (x * x);
            assert!((q.defect_over_x2(x) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn surface_point_wraps_theta() {
        let p = SurfacePoint::new(1.0, -0.5).unwrap();
        assert!((p.theta - (std::f64::consts::TAU - 0.5)).abs() < 1e-15);
        assert!(SurfacePoint::new(4.0, 0.0).is_err());
        assert!(SurfacePoint::new(0.0, 0.0).unwrap().is_pole());
    }
}
