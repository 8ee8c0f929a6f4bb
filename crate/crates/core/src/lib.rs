//! Zoll surfaces of revolution and the K=1 Finsler metrics they induce on
//! their manifold of oriented geodesics.
//!
//! A surface is described by an odd polynomial profile `h` through the metric
//! `g = (1 + h(cos r))² dr² + sin² r dθ²` on the sphere. From it this crate
//! computes the Gauss curvature, the geodesic flow and its closure integrals,
//! the normalized Jacobi fields, and the Finsler indicatrix on the manifold of
//! geodesics in parametric, regularized and implicit-polynomial form. The
//! Finsler norm itself, its fundamental tensor, the Cartan/Landsberg
//! invariants and the Finsler geodesic flow are in [`finsler`].
//!
//! ```
//! use zollfins::profile::ZollProfile;
//! use zollfins::geodesics::closure_integrals;
//!
//! let h = ZollProfile::example_one(0.25).unwrap();
//! let closure = closure_integrals(&h, 0.5).unwrap();
//! assert!((closure.time - std::f64::consts::PI).abs() < 1e-10);
//! ```

pub mod error;
pub mod finsler;
pub mod geodesics;
pub mod jacobi;
pub mod moduli;
pub mod ode;
pub mod output;
pub mod poly;
pub mod profile;
pub mod quadrature;

pub use error::{Error, Result};

/// Sign of `dr/dt` along a geodesic. The same sign labels the two arcs of
/// the indicatrix, which meet at the turning latitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Branch {
        if s < 0.0 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }

    pub fn flipped(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }

    /// `1` or `-1`, as written to CSV files.
    pub fn as_i32(self) -> i32 {
        match self {
            Branch::Plus => 1,
            Branch::Minus => -1,
        }
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(std::f64::consts::TAU);
    if w >= std::f64::consts::TAU {
        0.0
    } else {
        w
    }
}

/// Signed difference `a - b` wrapped into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}
