use thiserror::Error;

use crate::finsler::FinslerSample;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("argument x = {x} lies outside [-1, 1]")]
    Domain { x: f64 },

    #[error("metric degenerates at the pole r = {r}")]
    DegenerateMetric { r: f64 },

    #[error("too close to a pole (sin r = {sin_r:e})")]
    PoleProximity { sin_r: f64 },

    #[error("invalid geodesic state: {0}")]
    InvalidState(String),

    #[error("latitude r = {r} lies outside the band [{lo}, {hi}]")]
    OutsideBand { r: f64, lo: f64, hi: f64 },

    #[error("|c| = 1 describes an equator, which has no turning points")]
    Equator,

    #[error("finite-difference step {step:e} is outside the usable range")]
    BadStep { step: f64 },

    #[error("step-size controller failed at t = {t} (h = {h:e})")]
    StepFailure { t: f64, h: f64 },

    #[error("quadrature not converged: value {value}, order disagreement {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("indicatrix is not convex: {0}")]
    ConvexityViolation(String),

    #[error("ray in direction ({v1}, {v2}) does not cross the indicatrix")]
    NoBracket { v1: f64, v2: f64 },

    #[error("trajectory left the chart at t = {t} (R = {lat})")]
    ChartExit {
        t: f64,
        lat: f64,
        partial: Vec<FinslerSample>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
