use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use zollfins::finsler::{finsler_geodesic, unit_vector, FinslerTrace};
use zollfins::geodesics::{integrate_geodesic_sampled, GeodesicState};
use zollfins::moduli::{indicatrix_csv, indicatrix_polygon, check_convex, ModuliPoint};
use zollfins::output::{csv, num};
use zollfins::Error;

use crate::config::{RunConfig, Side};
use crate::svg::{self, Curve};

/// Process exit status of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Curvature or convexity failure, or a Finsler trace leaving the chart.
    Violation,
    /// At least one invariant of `verify` failed.
    Failed,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::Violation => 2,
            Outcome::Failed => 3,
        }
    }
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn prepare_out(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))
}

/// `1.0` prints as `1`, `0.25` as `0.25`, `-0.3` as `-0.3`.
pub fn label(x: f64) -> String {
    format!("{x}")
}

pub fn curvature(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.profile;
    let n = cfg.samples;
    let rows = (0..=n).map(|i| {
        let x = -1.0 + 2.0 * i as f64 / n as f64;
        vec![num(x), num(p.curvature_at(x))]
    });
    prepare_out(cfg)?;
    write_atomic(&cfg.out.join("curvature.csv"), &csv("x,G", rows))?;
    let check = p.check_positive_curvature();
    if check.positive {
        println!("G > 0 on [-1, 1]; min G = {} at x = {}", check.g_min, check.x_min);
        Ok(Outcome::Ok)
    } else {
        println!("G <= 0 at x = {}, G = {}", check.x_min, check.g_min);
        Ok(Outcome::Violation)
    }
}

pub fn indicatrix(cfg: &RunConfig) -> Result<Outcome> {
    let p = &cfg.profile;
    let curves: Vec<_> = cfg
        .r_list
        .par_iter()
        .map(|&lat| indicatrix_polygon(p, lat, cfg.samples).map(|c| (lat, c)))
        .collect::<Result<_, _>>()
        .context("sampling indicatrices")?;
    for (lat, curve) in &curves {
        if let Err(e) = check_convex(curve) {
            println!("indicatrix at R = {} is not strictly convex: {e}", label(*lat));
            return Ok(Outcome::Violation);
        }
    }
    prepare_out(cfg)?;
    for (lat, curve) in &curves {
        let name = format!("indicatrix_R{}.csv", label(*lat));
        write_atomic(&cfg.out.join(name), &indicatrix_csv(curve))?;
    }
    let plot: Vec<Curve> = curves
        .iter()
        .map(|(lat, curve)| Curve {
            label: format!("R = {}", label(*lat)),
            points: curve.iter().map(|s| (s.v1, s.v2)).collect(),
        })
        .collect();
    write_atomic(&cfg.out.join("indicatrices.svg"), &svg::plot(&plot, cfg.width, cfg.height, "v1", "v2"))?;
    println!("wrote {} indicatrices to {}", curves.len(), cfg.out.display());
    Ok(Outcome::Ok)
}

pub fn geodesic(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.side {
        Side::Zoll => zoll_geodesics(cfg),
        Side::Finsler => finsler_trace(cfg),
    }
}

fn zoll_geodesics(cfg: &RunConfig) -> Result<Outcome> {
    let traces: Vec<_> = cfg
        .c_list
        .par_iter()
        .map(|&c| {
            let start = GeodesicState::at_turning_point(c, 0.0)?;
            integrate_geodesic_sampled(&cfg.profile, &start, cfg.t_end, cfg.ode_tol(), cfg.samples)
        })
        .collect::<Result<_, _>>()
        .context("integrating geodesics")?;
    prepare_out(cfg)?;
    for trace in &traces {
        let name = format!("geodesic_c{}.csv", label(trace.c));
        write_atomic(&cfg.out.join(&name), &trace.to_csv())?;
        let last = trace.samples.last().expect("at least two samples");
        println!("c = {}: t = {}, r = {}, theta = {} ({name})", label(trace.c), last.t, last.r, last.theta);
    }
    Ok(Outcome::Ok)
}

fn finsler_trace(cfg: &RunConfig) -> Result<Outcome> {
    let (lat, lon) = cfg.start;
    let start = ModuliPoint::new(lat, lon)?;
    let v0 = unit_vector(&cfg.profile, lat, cfg.dir)?;
    let path = cfg.out.join("geodesic_finsler.csv");
    match finsler_geodesic(&cfg.profile, start, v0, cfg.t_end, cfg.ode_tol(), cfg.samples) {
        Ok(trace) => {
            prepare_out(cfg)?;
            write_atomic(&path, &trace.to_csv())?;
            report_finsler(&trace);
            Ok(Outcome::Ok)
        }
        Err(Error::ChartExit { t, lat, partial }) => {
            prepare_out(cfg)?;
            write_atomic(&path, &zollfins::finsler::finsler_csv(&partial))?;
            println!("left the chart at t = {t} (R = {lat}); partial trace of {} samples written", partial.len());
            Ok(Outcome::Violation)
        }
        Err(e) => Err(e.into()),
    }
}

fn report_finsler(trace: &FinslerTrace) {
    let first = trace.samples[0];
    let last = *trace.samples.last().expect("at least two samples");
    let gap = zollfins::finsler::chart_distance((first.lat, first.lon), (last.lat, last.lon));
    println!("t = {}: R = {}, Theta = {}, distance to start {gap:e}, F drift {:e}", last.t, last.lat, last.lon, trace.f_drift());
}
