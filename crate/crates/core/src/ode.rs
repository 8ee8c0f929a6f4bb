//! Embedded Dormand–Prince 5(4) integrator with a PI step-size controller.
//!
//! Small fixed-size systems only (`[f64; N]` state). The right-hand side may
//! fail, which aborts the integration and propagates the error; the Finsler
//! geodesic flow uses this to stop cleanly at the chart boundary.

use crate::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const BETA: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Dopri5 {
            rtol: tol,
            atol: tol,
            max_steps: 1_000_000,
        }
    }

    /// Advances `y0` from `t0` to `t1 >= t0`. `h` carries the step size in
    /// and out so consecutive calls (sampling a trajectory) reuse it; pass
    /// `0.0` to let the integrator pick a starting step.
    pub fn integrate<const N: usize, F>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
        h: &mut f64,
        stats: &mut Stats,
    ) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        if t1 < t0 {
            return Err(Error::InvalidArgument(format!(
                "backward integration requested ({t0} -> {t1})"
            )));
        }
        if t1 == t0 {
            return Ok(y0);
        }

        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y)?;
        stats.rhs_evals += 1;

        if *h <= 0.0 || !h.is_finite() {
            *h = self.initial_step(&y, &k1, t1 - t0);
        }
        let mut err_prev = 1e-4_f64;
        let mut steps = 0usize;

        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::StepFailure { t, h: *h });
            }
            let last = t + *h >= t1;
            let step = if last { t1 - t } else { *h };
            if step <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::StepFailure { t, h: step });
            }

            let mut tmp = [0.0; N];
            for i in 0..N {
                tmp[i] = y[i] + step * A21 * k1[i];
            }
            let k2 = rhs(t + C2 * step, &tmp)?;
            for i in 0..N {
                tmp[i] = y[i] + step * (A31 * k1[i] + A32 * k2[i]);
            }
            let k3 = rhs(t + C3 * step, &tmp)?;
            for i in 0..N {
                tmp[i] = y[i] + step * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            let k4 = rhs(t + C4 * step, &tmp)?;
            for i in 0..N {
                tmp[i] = y[i] + step * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            let k5 = rhs(t + C5 * step, &tmp)?;
            for i in 0..N {
                tmp[i] = y[i]
                    + step
                        * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let k6 = rhs(t + step, &tmp)?;
            let mut y_new = [0.0; N];
            for i in 0..N {
                y_new[i] = y[i]
                    + step
                        * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            let k7 = rhs(t + step, &y_new)?;
            stats.rhs_evals += 6;

            let mut err = 0.0;
            for i in 0..N {
                let e = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / scale).powi(2);
            }
            let err = (err / N as f64).sqrt();

            if err <= 1.0 {
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2 + 0.75 * BETA) * err_prev.powf(BETA))
                        .clamp(MIN_FACTOR, MAX_FACTOR)
                };
                err_prev = err.max(1e-4);
                t = if last { t1 } else { t + step };
                y = y_new;
                k1 = k7;
                stats.accepted += 1;
                if !last {
                    *h = step * factor;
                }
            } else {
                stats.rejected += 1;
                let factor = if err.is_finite() {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                *h = step * factor;
            }
        }
        Ok(y)
    }

    fn initial_step<const N: usize>(&self, y: &[f64; N], f: &[f64; N], span: f64) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (f[i] / sc).powi(2);
        }
        let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h.min(span).min(0.1)
    }
}
