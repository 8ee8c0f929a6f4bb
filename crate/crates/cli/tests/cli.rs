use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zollfins(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zollfins"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn column(text: &str, k: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn curvature_of_example_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollfins(dir.path(), &["--h", "0.25,-0.25", "curvature"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
    assert!(text.starts_with("x,G\n"));
    let g = column(&text, 1);
    let min = g.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((min - 0.5).abs() < 1e-12);
    assert!((g[0] - 0.5).abs() < 1e-12);
}

#[test]
fn negative_curvature_exits_two_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollfins(dir.path(), &["--h", "0.6,-0.6", "curvature"]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stdout(&o);
    assert!(msg.contains("x = -1"), "{msg}");
    assert!(msg.contains("G = -0.19999"), "{msg}");
}

#[test]
fn round_sphere_curvature_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollfins(dir.path(), &["--h", "", "curvature"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
    assert!(column(&text, 1).iter().all(|&g| g == 1.0));
}

#[test]
fn numbers_carry_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    zollfins(dir.path(), &["--h", "1,-2,1", "curvature"]);
    let text = fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
    for field in text.lines().skip(1).flat_map(|l| l.split(',')) {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{field}");
    }
}

#[test]
fn round_sphere_indicatrix_is_an_ellipse() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollfins(dir.path(), &["--h", "", "--R", "1.0471975511965976", "--samples", "64", "indicatrix"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("indicatrix_R1.0471975511965976.csv")).unwrap();
    assert!(text.starts_with("R,Theta,branch,r,v1,v2\n"));
    let (v1, v2) = (column(&text, 4), column(&text, 5));
    assert_eq!(v1.len(), 64);
    for (a, b) in v1.iter().zip(&v2) {
        assert!((a * a + 0.25 * b * b - 1.0).abs() < 1e-10);
    }
    let svg = fs::read_to_string(dir.path().join("indicatrices.svg")).unwrap();
    assert!(svg.contains("viewBox") && svg.contains("<polyline"));
}

#[test]
fn nonconvex_indicatrix_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollfins(dir.path(), &["--h", "0.6,-0.6", "--R", "0.0", "indicatrix"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("indicatrices.svg").exists());
}

#[test]
fn verify_passes_and_fails_as_expected() {
    let dir = tempfile::tempdir().unwrap();
    let ok = zollfins(dir.path(), &["--h", "0.25,-0.25", "verify"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);

    let bad = zollfins(dir.path(), &["--h", "0.6,-0.6", "verify"]);
    assert_eq!(bad.status.code(), Some(3));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let status = |name: &str| checks.iter().find(|c| c["name"] == name).unwrap()["status"].clone();
    assert_eq!(status("curvature_positive"), "fail");
    assert_eq!(status("indicatrix_convexity"), "fail");
    assert_eq!(status("closure_integrals"), "skipped");
}

#[test]
fn round_sphere_verify_includes_riemannian_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollfins(dir.path(), &["--h", "", "verify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS  riemannian_invariants"));
}

#[test]
fn zoll_geodesic_closes() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollfins(dir.path(), &["--h", "0.25,-0.25", "--c", "0.5,0", "--t-end", "6.283185307179586", "geodesic"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("geodesic_c0.5.csv")).unwrap();
    assert!(text.starts_with("t,r,theta,c,sign\n"));
    let (r, th) = (column(&text, 1), column(&text, 2));
    assert!((r.last().unwrap() - r[0]).abs() < 1e-8);
    assert!(zollfins::angle_diff(*th.last().unwrap(), th[0]).abs() < 1e-8);

    let meridian = fs::read_to_string(dir.path().join("geodesic_c0.csv")).unwrap();
    let th: Vec<f64> = column(&meridian, 2);
    assert!(th.iter().all(|&t| t.abs() < 1e-12 || (t - std::f64::consts::PI).abs() < 1e-12));
}

#[test]
fn finsler_geodesic_returns_and_chart_exit_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = zollfins(dir.path(), &["--h", "0.25,-0.25", "geodesic", "--side", "finsler", "--start", "0.2,0", "--dir", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("geodesic_finsler.csv")).unwrap();
    assert!(text.starts_with("t,R,Theta,vR,vTheta,F\n"));
    let (lat, lon) = (column(&text, 1), column(&text, 2));
    let end = (*lat.last().unwrap(), *lon.last().unwrap());
    assert!(zollfins::finsler::chart_distance(end, (0.2, 0.0)) < 1e-3);

    let o = zollfins(dir.path(), &["--h", "", "geodesic", "--side", "finsler", "--dir", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let partial = fs::read_to_string(dir.path().join("geodesic_finsler.csv")).unwrap();
    assert!(partial.lines().count() > 2);
}

#[test]
fn bad_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(zollfins(dir.path(), &["--h", "0.3", "curvature"]).status.code(), Some(1));
    assert_eq!(zollfins(dir.path(), &["--tol", "1", "verify"]).status.code(), Some(1));
    assert_eq!(zollfins(dir.path(), &["--samples", "4", "indicatrix"]).status.code(), Some(1));
    assert_eq!(zollfins(dir.path(), &["--nonsense"]).status.code(), Some(1));
    let file = dir.path().join("not-a-dir");
    fs::write(&file, "").unwrap();
    assert_eq!(zollfins(&file, &["curvature"]).status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "h=0.6,-0.6\nsamples=32\n").unwrap();
    let p = cfg.to_str().unwrap();
    assert_eq!(zollfins(dir.path(), &["--config", p, "curvature"]).status.code(), Some(2));
    assert_eq!(zollfins(dir.path(), &["--config", p, "--h", "0.25,-0.25", "curvature"]).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("curvature.csv")).unwrap();
    assert_eq!(text.lines().count(), 34);
}
