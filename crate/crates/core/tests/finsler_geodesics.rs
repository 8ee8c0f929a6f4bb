use std::f64::consts::{PI, TAU};

use zollfins::finsler::{chart_distance, finsler_geodesic, unit_vector};
use zollfins::moduli::ModuliPoint;
use zollfins::profile::ZollProfile;
use zollfins::Error;

const START: (f64, f64) = (0.2, 0.0);

fn endpoints(p: &ZollProfile, psi: f64, tol: f64) -> ((f64, f64), (f64, f64)) {
    let start = ModuliPoint::new(START.0, START.1).unwrap();
    let v0 = unit_vector(p, START.0, psi).unwrap();
    let trace = finsler_geodesic(p, start, v0, TAU, tol, 3).unwrap();
    assert!(trace.f_drift() < 10.0 * tol.max(1e-9));
    let half = trace.samples[1];
    let end = trace.samples[2];
    ((half.lat, half.lon), (end.lat, end.lon))
}

#[test]
fn closed_with_period_two_pi() {
    for p in [ZollProfile::example_one(0.25).unwrap(), ZollProfile::example_one(0.45).unwrap(), ZollProfile::example_two()] {
        for psi in [0.3, 1.2, 2.6, 4.4] {
            let (_, fine) = endpoints(&p, psi, 1e-10);
            let (_, coarse) = endpoints(&p, psi, 1e-8);
            assert!(chart_distance(fine, START) < 1e-3, "psi {psi}: {fine:?}");
            assert!(chart_distance(fine, coarse) < 1e-3);
        }
    }
}

#[test]
fn geodesics_from_a_point_meet_at_pi() {
    let p = ZollProfile::example_one(0.25).unwrap();
    let (a, _) = endpoints(&p, 0.3, 1e-10);
    let (b, _) = endpoints(&p, 2.0, 1e-10);
    assert!(chart_distance(a, b) < 1e-3, "{a:?} vs {b:?}");
}

#[test]
fn meridian_direction_leaves_the_chart() {
    let p = ZollProfile::round_sphere();
    let start = ModuliPoint::new(0.2, 0.0).unwrap();
    let v0 = unit_vector(&p, 0.2, 0.0).unwrap();
    match finsler_geodesic(&p, start, v0, TAU, 1e-9, 200) {
        Err(Error::ChartExit { t, partial, .. }) => {
            assert!(t > 0.0 && t < PI);
            assert!(!partial.is_empty());
        }
        other => panic!("expected a chart exit, got {other:?}"),
    }
}
