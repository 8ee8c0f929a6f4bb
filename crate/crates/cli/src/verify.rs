//! The `verify` suite: every invariant with its measured residual.

use std::f64::consts::{PI, TAU};

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;
use zollfins::finsler::{
    chart_distance, finsler_f, finsler_geodesic, fundamental_tensor, invariant_flow_check, invariants_ij,
    unit_vector, Indicatrix, DEFAULT_HESSIAN_STEP,
};
use zollfins::geodesics::closure_integrals;
use zollfins::jacobi::{jacobi_ode_check, jacobi_pair};
use zollfins::moduli::{implicit_residual, indicatrix_at, indicatrix_curvature_at, indicatrix_curve, ModuliPoint};
use zollfins::profile::ZollProfile;
use zollfins::Branch;

use crate::commands::{prepare_out, write_atomic, Outcome};
use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub profile: Vec<f64>,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn measured(name: &'static str, residual: f64, tolerance: f64, detail: impl Into<String>) -> Check {
    let status = if residual < tolerance { Status::Pass } else { Status::Fail };
    Check { name, status, residual: Some(residual), tolerance, detail: detail.into() }
}

fn failed(name: &'static str, tolerance: f64, err: impl std::fmt::Display) -> Check {
    Check { name, status: Status::Fail, residual: None, tolerance, detail: err.to_string() }
}

fn skipped(name: &'static str, tolerance: f64, why: &str) -> Check {
    Check { name, status: Status::Skipped, residual: None, tolerance, detail: why.to_string() }
}

fn from_result(name: &'static str, tolerance: f64, detail: &str, r: zollfins::Result<f64>) -> Check {
    match r {
        Ok(x) => measured(name, x, tolerance, detail),
        Err(e) => failed(name, tolerance, e),
    }
}

fn max_of<I: IntoIterator<Item = zollfins::Result<f64>>>(it: I) -> zollfins::Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, x| Ok(m.max(x?)))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Name, tolerance and runner of one check.
type Suite = (&'static str, f64, fn(&ZollProfile, &RunConfig) -> Check);

const CHART_LATS: [f64; 9] = [-1.4, -1.0, -0.6, -0.2, 0.0, 0.3, 0.7, 1.1, 1.45];
const CLAIRAUT: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const FINSLER_DIRS: [f64; 4] = [0.3, 1.2, 2.6, 4.4];
const FINSLER_START: (f64, f64) = (0.2, 0.0);

pub fn run_checks(cfg: &RunConfig) -> Vec<Check> {
    let p = &cfg.profile;
    let mut checks = Vec::new();
    let curvature = p.check_positive_curvature();
    checks.push(Check {
        name: "curvature_positive",
        status: if curvature.positive { Status::Pass } else { Status::Fail },
        residual: Some(curvature.g_min),
        tolerance: 0.0,
        detail: format!("min G = {} at x = {}", curvature.g_min, curvature.x_min),
    });
    checks.push(convexity(p, cfg));
    let rest: [Suite; 12] = [
        ("curvature_finite_difference", 1e-6, curvature_fd),
        ("closure_integrals", 1e-8, closure),
        ("jacobi_wronskian", 1e-9, wronskian),
        ("jacobi_equation", 1e-5, jacobi_equation),
        ("representation_agreement", 1e-8, representation),
        ("homogeneity", 1e-10, homogeneity),
        ("unit_indicatrix", 1e-9, unit_indicatrix),
        ("tensor_positive_definite", 0.0, positive_definite),
        ("invariant_flow", 1e-4, invariant_flow),
        ("riemannian_invariants", 1e-12, riemannian),
        ("finsler_period", 1e-3, finsler_period),
        ("finsler_meeting", 1e-3, finsler_meeting),
    ];
    if curvature.positive {
        checks.extend(rest.par_iter().map(|(_, _, f)| f(p, cfg)).collect::<Vec<_>>());
    } else {
        checks.extend(rest.iter().map(|&(name, tol, _)| skipped(name, tol, "curvature is not positive")));
    }
    checks
}

/// Convexity certificate of sampled curves at each `R` (plus `R = 0`, whose
/// geodesics sweep all latitudes), and the two sides of `k = (dt/dr)² G`.
fn convexity(p: &ZollProfile, cfg: &RunConfig) -> Check {
    const NAME: &str = "indicatrix_convexity";
    let mut lats = cfg.r_list.clone();
    if !lats.contains(&0.0) {
        lats.push(0.0);
    }
    for &lat in &lats {
        if let Err(e) = indicatrix_curve(p, lat, cfg.samples) {
            return failed(NAME, 1e-6, format!("R = {lat}: {e}"));
        }
    }
    let mut worst = 0.0f64;
    let mut min_k = f64::INFINITY;
    for &lat in &lats {
        for u in linspace(0.01, TAU - 0.01, 200) {
            if (u - PI).abs() < 1e-3 {
                continue;
            }
            match indicatrix_curvature_at(p, lat, u) {
                Ok((lhs, rhs)) => {
                    worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
                    min_k = min_k.min(lhs);
                }
                Err(e) => return failed(NAME, 1e-6, format!("R = {lat}, u = {u}: {e}")),
            }
        }
    }
    if min_k <= 0.0 {
        return Check {
            name: NAME,
            status: Status::Fail,
            residual: Some(worst),
            tolerance: 1e-6,
            detail: format!("indicatrix curvature reaches {min_k}"),
        };
    }
    measured(NAME, worst, 1e-6, "relative gap between the two sides of k(r)")
}

fn curvature_fd(p: &ZollProfile, _: &RunConfig) -> Check {
    let r = linspace(0.05, PI - 0.05, 100);
    let worst = max_of(r.iter().map(|&r| {
        let g = p.gauss_curvature(r);
        Ok((p.curvature_fd_check(r, 1e-4)? - g).abs() / g.abs().max(1.0))
    }));
    from_result("curvature_finite_difference", 1e-6, "closed form vs metric finite differences", worst)
}

fn closure(p: &ZollProfile, cfg: &RunConfig) -> Check {
    let mut cs: Vec<f64> = vec![0.0];
    cs.extend(CLAIRAUT.iter().flat_map(|&c| [c, -c]));
    cs.extend(cfg.c_list.iter().copied().filter(|c| c.abs() < 1.0));
    let worst = max_of(cs.iter().map(|&c| {
        let cl = closure_integrals(p, c)?;
        Ok((cl.time - PI).abs().max((cl.advance - PI).abs()))
    }));
    from_result("closure_integrals", 1e-8, "max |T - π|, |Θ_adv - π|", worst)
}

fn band(c: f64, inset: f64, n: usize) -> Vec<f64> {
    let rc = c.asin();
    linspace(rc + inset, PI - rc - inset, n)
}

fn wronskian(p: &ZollProfile, _: &RunConfig) -> Check {
    let worst = max_of(CLAIRAUT.iter().flat_map(|&c| {
        band(c, 1e-3, 41).into_iter().flat_map(move |r| {
            [Branch::Plus, Branch::Minus].map(|b| Ok((jacobi_pair(p, c, r, b)?.wronskian() + 1.0).abs()))
        })
    }));
    from_result("jacobi_wronskian", 1e-9, "max |W + 1|", worst)
}

fn jacobi_equation(p: &ZollProfile, _: &RunConfig) -> Check {
    let worst = max_of(CLAIRAUT.iter().flat_map(|&c| {
        let grid = band(c, 0.05, 21);
        [Branch::Plus, Branch::Minus].map(move |b| jacobi_ode_check(p, c, &grid, b, 1e-4))
    }));
    from_result("jacobi_equation", 1e-5, "max |y'' + G y| by finite differences", worst)
}

fn representation(p: &ZollProfile, _: &RunConfig) -> Check {
    let worst = max_of(CHART_LATS.iter().flat_map(|&lat| {
        (0..200).flat_map(move |i| {
            let u = PI * (i as f64 + 0.5) / 200.0;
            [(u, Branch::Plus), (u + PI, Branch::Minus)].map(|(u, b)| {
                let s = indicatrix_at(p, lat, u, b)?;
                implicit_residual(p, lat, s.v1, s.v2).map(f64::abs)
            })
        })
    }));
    from_result("representation_agreement", 1e-8, "implicit residual of parametric samples", worst)
}

fn direction_grid(n: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..n).map(move |i| {
        let a = TAU * i as f64 / n as f64;
        (a.cos(), a.sin())
    })
}

fn homogeneity(p: &ZollProfile, _: &RunConfig) -> Check {
    let worst = max_of(CHART_LATS.iter().flat_map(|&lat| {
        direction_grid(24).flat_map(move |v| {
            [1e-3, 0.5, 2.0, 1e3].map(|k| {
                let f = finsler_f(p, lat, 0.0, v)?;
                let fk = finsler_f(p, lat, 0.0, (k * v.0, k * v.1))?;
                Ok((fk - k * f).abs() / (k * f))
            })
        })
    }));
    from_result("homogeneity", 1e-10, "max |F(kv) - kF(v)| / kF(v)", worst)
}

fn unit_indicatrix(p: &ZollProfile, _: &RunConfig) -> Check {
    let worst = max_of(CHART_LATS.iter().map(|&lat| {
        let ind = Indicatrix::new(p, lat)?;
        max_of((0..200).map(|i| {
            let (v1, v2) = ind.point(TAU * i as f64 / 200.0);
            Ok((ind.norm(v1, v2)? - 1.0).abs())
        }))
    }));
    from_result("unit_indicatrix", 1e-9, "max |F - 1| on indicatrix samples", worst)
}

fn positive_definite(p: &ZollProfile, _: &RunConfig) -> Check {
    const NAME: &str = "tensor_positive_definite";
    let mut min_det = f64::INFINITY;
    for &lat in &CHART_LATS {
        for v in direction_grid(100) {
            match fundamental_tensor(p, lat, 0.0, v, DEFAULT_HESSIAN_STEP) {
                Ok(g) => {
                    if !g.is_positive_definite() {
                        return failed(NAME, 0.0, format!("not positive definite at R = {lat}, v = {v:?}"));
                    }
                    min_det = min_det.min(g.det());
                }
                Err(e) => return failed(NAME, 0.0, e),
            }
        }
    }
    Check {
        name: NAME,
        status: Status::Pass,
        residual: Some(min_det),
        tolerance: 0.0,
        detail: "smallest det g over the grid".into(),
    }
}

fn invariant_flow(p: &ZollProfile, _: &RunConfig) -> Check {
    let worst = max_of(
        linspace(0.3, PI - 0.3, 9)
            .into_iter()
            .flat_map(|r| linspace(0.0, TAU, 9).into_iter().map(move |phi| invariant_flow_check(p, r, phi, 1e-5))),
    );
    from_result("invariant_flow", 1e-4, "fibre-rotation relation at dφ = 1e-5", worst)
}

fn riemannian(p: &ZollProfile, _: &RunConfig) -> Check {
    if !p.is_round() {
        return skipped("riemannian_invariants", 1e-12, "applies to the round sphere only");
    }
    let worst = max_of(linspace(0.05, PI - 0.05, 60).into_iter().flat_map(|r| {
        linspace(0.0, TAU, 36).into_iter().map(move |phi| {
            let inv = invariants_ij(p, r, phi)?;
            Ok(inv.i.abs() + inv.j.abs())
        })
    }));
    from_result("riemannian_invariants", 1e-12, "max |I| + |J|", worst)
}

/// Positions at `t = π` and `t = 2π` of the Finsler geodesic leaving
/// [`FINSLER_START`] in direction `ψ`.
fn finsler_endpoints(p: &ZollProfile, cfg: &RunConfig, psi: f64) -> zollfins::Result<[(f64, f64); 2]> {
    let (lat, lon) = FINSLER_START;
    let v0 = unit_vector(p, lat, psi)?;
    let trace = finsler_geodesic(p, ModuliPoint::new(lat, lon)?, v0, TAU, cfg.ode_tol().min(1e-9), 3)?;
    let at = |i: usize| (trace.samples[i].lat, trace.samples[i].lon);
    Ok([at(1), at(2)])
}

fn finsler_period(p: &ZollProfile, cfg: &RunConfig) -> Check {
    let worst = max_of(FINSLER_DIRS.iter().map(|&psi| {
        let [_, end] = finsler_endpoints(p, cfg, psi)?;
        Ok(chart_distance(end, FINSLER_START))
    }));
    from_result("finsler_period", 1e-3, "distance to the start at t = 2π", worst)
}

fn finsler_meeting(p: &ZollProfile, cfg: &RunConfig) -> Check {
    let halves: zollfins::Result<Vec<(f64, f64)>> =
        FINSLER_DIRS.iter().map(|&psi| Ok(finsler_endpoints(p, cfg, psi)?[0])).collect();
    let worst = halves.map(|h| h.iter().map(|&q| chart_distance(q, h[0])).fold(0.0, f64::max));
    from_result("finsler_meeting", 1e-3, "spread of the t = π points", worst)
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let checks = run_checks(cfg);
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    let report = Report { profile: cfg.profile.odd_coeffs().to_vec(), passed, checks };
    prepare_out(cfg)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    write_atomic(&cfg.out.join("report.json"), &json)?;
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let residual = c.residual.map_or_else(|| "-".to_string(), |r| format!("{r:.3e}"));
        println!("{status:<4}  {:<28} {residual:>11}  (tol {:.0e})  {}", c.name, c.tolerance, c.detail);
    }
    println!("{}", if passed { "all checks passed" } else { "some checks failed" });
    Ok(if passed { Outcome::Ok } else { Outcome::Failed })
}
