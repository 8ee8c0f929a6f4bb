//! Run configuration: command-line flags layered over an optional
//! `key=value` file.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use zollfins::profile::ZollProfile;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SAMPLES: usize = 512;
pub const DEFAULT_R: [f64; 4] = [0.2, 0.6, 1.0, 1.3];
pub const DEFAULT_C: [f64; 1] = [0.5];
pub const DEFAULT_START: (f64, f64) = (0.2, 0.0);
pub const DEFAULT_DIR: f64 = 0.3;
pub const DEFAULT_PLOT_SIZE: u32 = 640;
pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Parser)]
#[command(name = "zollfins", version, about = "Zoll surfaces of revolution and their K = 1 Finsler duals")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Scan the Gauss curvature `G(x)` over `x = cos r ∈ [-1, 1]`.
    Curvature,
    /// Sample Finsler indicatrices at each `--R` and plot them.
    Indicatrix,
    /// Run the invariant suites and write `report.json`.
    Verify,
    /// Trace a geodesic on the surface or on the manifold of geodesics.
    Geodesic,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::Indicatrix => "indicatrix",
            Command::Verify => "verify",
            Command::Geodesic => "geodesic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Zoll,
    Finsler,
}

/// Every flag is optional so that unset ones fall back to the config file.
#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Odd coefficients `a1,a3,...` of `h`; empty means the round sphere.
    #[arg(long = "h", global = true, allow_hyphen_values = true, value_name = "COEFFS")]
    pub h: Option<String>,
    /// Comma-separated chart latitudes.
    #[arg(long = "R", global = true, allow_hyphen_values = true, value_name = "LIST")]
    pub r_list: Option<String>,
    /// Comma-separated Clairaut constants.
    #[arg(long = "c", global = true, allow_hyphen_values = true, value_name = "LIST")]
    pub c_list: Option<String>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub side: Option<Side>,
    /// `key=value` file; keys are the long flag names.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Finsler start point `R,Theta`.
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "R,THETA")]
    pub start: Option<String>,
    /// Direction angle `ψ` of the Finsler start vector in the `(∂R, ∂Θ)` plane.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dir: Option<f64>,
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    #[arg(long, global = true)]
    pub width: Option<u32>,
    #[arg(long, global = true)]
    pub height: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub profile: ZollProfile,
    pub command: Command,
    pub r_list: Vec<f64>,
    pub c_list: Vec<f64>,
    pub tol: f64,
    pub samples: usize,
    pub out: PathBuf,
    pub side: Side,
    pub start: (f64, f64),
    pub dir: f64,
    pub t_end: f64,
    pub width: u32,
    pub height: u32,
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("not a number: {s:?}")))
        .collect()
}

fn read_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), n + 1);
        };
        map.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: [&str; 12] =
    ["h", "R", "c", "tol", "samples", "out", "side", "start", "dir", "t-end", "width", "height"];

impl RunConfig {
    pub fn resolve(flags: Flags, command: Command) -> Result<RunConfig> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            bail!("unknown config key {k:?}");
        }
        let get = |key: &str| file.get(key).map(String::as_str);
        let num = |key: &str| -> Result<Option<f64>> {
            get(key).map(|v| v.parse::<f64>().with_context(|| format!("{key} = {v:?}"))).transpose()
        };
        let int = |key: &str| -> Result<Option<u64>> {
            get(key).map(|v| v.parse::<u64>().with_context(|| format!("{key} = {v:?}"))).transpose()
        };

        let h = flags.h.clone().or_else(|| get("h").map(String::from)).unwrap_or_default();
        let profile = ZollProfile::parse(&h).with_context(|| format!("profile {h:?}"))?;
        let r_list = match flags.r_list.as_deref().or(get("R")) {
            Some(s) => parse_list(s)?,
            None => DEFAULT_R.to_vec(),
        };
        let c_list = match flags.c_list.as_deref().or(get("c")) {
            Some(s) => parse_list(s)?,
            None => DEFAULT_C.to_vec(),
        };
        let side = match flags.side {
            Some(s) => s,
            None => match get("side") {
                Some(s) => Side::from_str(s, true).map_err(|e| anyhow::anyhow!("side: {e}"))?,
                None => Side::Zoll,
            },
        };
        let start = match flags.start.as_deref().or(get("start")) {
            Some(s) => match parse_list(s)?.as_slice() {
                [r, t] => (*r, *t),
                _ => bail!("--start needs R,Theta"),
            },
            None => DEFAULT_START,
        };
        let cfg = RunConfig {
            profile,
            command,
            r_list,
            c_list,
            tol: flags.tol.or(num("tol")?).unwrap_or(DEFAULT_TOL),
            samples: flags.samples.or(int("samples")?.map(|n| n as usize)).unwrap_or(DEFAULT_SAMPLES),
            out: flags.out.clone().or_else(|| get("out").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(".")),
            side,
            start,
            dir: flags.dir.or(num("dir")?).unwrap_or(DEFAULT_DIR),
            t_end: flags.t_end.or(num("t-end")?).unwrap_or(TAU),
            width: flags.width.or(int("width")?.map(|n| n as u32)).unwrap_or(DEFAULT_PLOT_SIZE),
            height: flags.height.or(int("height")?.map(|n| n as u32)).unwrap_or(DEFAULT_PLOT_SIZE),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(1e-12..=1e-2).contains(&self.tol) {
            bail!("tolerance {:e} outside [1e-12, 1e-2]", self.tol);
        }
        if self.samples < MIN_SAMPLES {
            bail!("samples = {} is below {MIN_SAMPLES}", self.samples);
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            bail!("t-end must be finite and non-negative");
        }
        if self.width == 0 || self.height == 0 {
            bail!("plot dimensions must be positive");
        }
        if self.r_list.iter().chain(&self.c_list).any(|x| !x.is_finite()) {
            bail!("R and c lists must be finite");
        }
        Ok(())
    }

    /// Integrator tolerance: the ODE solvers accept at most `1e-4`.
    pub fn ode_tol(&self) -> f64 {
        self.tol.min(1e-4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> Result<RunConfig> {
        let cli = Cli::try_parse_from(std::iter::once("zollfins").chain(args.iter().copied()))?;
        RunConfig::resolve(cli.opts, cli.command)
    }

    #[test]
    fn negative_coefficients_parse() {
        let cfg = resolve(&["--h", "-0.25,0.25", "curvature"]).unwrap();
        assert_eq!(cfg.profile.odd_coeffs(), &[-0.25, 0.25]);
        let cfg = resolve(&["curvature", "--R", "-0.3,0.4"]).unwrap();
        assert_eq!(cfg.r_list, vec![-0.3, 0.4]);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# comment\nh = 0.25,-0.25\ntol=1e-9\nsamples=64\n").unwrap();
        let p = path.to_str().unwrap();
        let cfg = resolve(&["--config", p, "--samples", "32", "verify"]).unwrap();
        assert_eq!(cfg.profile.odd_coeffs(), &[0.25, -0.25]);
        assert_eq!(cfg.tol, 1e-9);
        assert_eq!(cfg.samples, 32);
    }

    #[test]
    fn rejects_out_of_range_settings() {
        assert!(resolve(&["--tol", "0.5", "verify"]).is_err());
        assert!(resolve(&["--samples", "8", "verify"]).is_err());
        assert!(resolve(&["--h", "0.3", "verify"]).is_err());
    }
}
