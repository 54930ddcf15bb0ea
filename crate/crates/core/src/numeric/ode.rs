//! Embedded Runge-Kutta-Fehlberg 7(8) integrator with adaptive step control.

use crate::error::{Error, Result};

const STAGES: usize = 13;

const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    0.5,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; STAGES] = [
    [0.0; 12],
    [2.0 / 27.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 36.0, 1.0 / 12.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 20.0, 0.0, 0.0, 1.0 / 4.0, 1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-25.0 / 108.0, 0.0, 0.0, 125.0 / 108.0, -65.0 / 27.0, 125.0 / 54.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [31.0 / 300.0, 0.0, 0.0, 0.0, 61.0 / 225.0, -2.0 / 9.0, 13.0 / 900.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.0, 0.0, 0.0, -53.0 / 6.0, 704.0 / 45.0, -107.0 / 9.0, 67.0 / 90.0, 3.0, 0.0, 0.0, 0.0, 0.0],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.0,
        0.0,
    ],
    [3.0 / 205.0, 0.0, 0.0, 0.0, 0.0, -6.0 / 41.0, -3.0 / 205.0, -3.0 / 41.0, 3.0 / 41.0, 6.0 / 41.0, 0.0, 0.0],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

// Eighth-order weights (propagated solution).
const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

// err = y7 - y8 = (41/840) (k0 + k10 - k11 - k12) h
const ERR_W: f64 = 41.0 / 840.0;

/// Adaptive step-size settings.
#[derive(Debug, Clone, Copy)]
pub struct Rkf78 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; `None` picks `|t1 - t0| / 16`.
    pub initial_step: Option<f64>,
    /// Steps smaller than this (relative to the span) count as step-size collapse.
    pub min_step_frac: f64,
    pub max_steps: usize,
}

impl Default for Rkf78 {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            initial_step: None,
            min_step_frac: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

/// Result of one integration call.
#[derive(Debug, Clone)]
pub struct OdeOutcome<const N: usize> {
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
    /// Last accepted step size; a good seed for a subsequent call.
    pub last_step: f64,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]], coeffs: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

impl Rkf78 {
    pub fn with_tolerance(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    /// One RKF78 step. Returns the eighth-order update and the error vector.
    pub fn step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let mut ks = [[0.0; N]; STAGES];
        for s in 0..STAGES {
            let ys = axpy(y, h, &ks[..s], &A[s][..s]);
            ks[s] = f(t + C[s] * h, &ys);
        }
        let y8 = axpy(y, h, &ks, &B8);
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h * ERR_W * (ks[0][i] + ks[10][i] - ks[11][i] - ks[12][i]);
        }
        (y8, err)
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
    pub fn integrate<const N: usize, F>(&self, mut f: F, t0: f64, y0: [f64; N], t1: f64) -> Result<OdeOutcome<N>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(OdeOutcome {
                y: y0,
                accepted: 0,
                rejected: 0,
                last_step: 0.0,
            });
        }
        let dir = span.signum();
        let mut h = self.initial_step.map(f64::abs).unwrap_or(span.abs() / 16.0).min(span.abs()) * dir;
        let h_min = self.min_step_frac * span.abs().max(1.0);
        let mut t = t0;
        let mut y = y0;
        let mut accepted = 0;
        let mut rejected = 0;
        let mut last_step = h;
        while (t1 - t) * dir > 0.0 {
            if accepted + rejected >= self.max_steps {
                return Err(Error::numerical(format!("RKF78 exceeded {} steps", self.max_steps)));
            }
            let remaining = t1 - t;
            let mut final_step = false;
            if (h * dir) >= remaining * dir {
                h = remaining;
                final_step = true;
            }
            let (y_new, err) = Self::step(&mut f, t, &y, h);
            let mut norm: f64 = 0.0;
            for i in 0..N {
                let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                norm = norm.max(err[i].abs() / sc);
            }
            if !norm.is_finite() {
                return Err(Error::numerical(format!("non-finite state at t = {t}")));
            }
            if norm <= 1.0 {
                t = if final_step { t1 } else { t + h };
                y = y_new;
                accepted += 1;
                last_step = h;
                let factor = if norm == 0.0 { 4.0 } else { (0.9 * norm.powf(-1.0 / 8.0)).clamp(0.2, 4.0) };
                h *= factor;
            } else {
                rejected += 1;
                h *= (0.9 * norm.powf(-1.0 / 8.0)).clamp(0.1, 0.9);
                if h.abs() < h_min {
                    return Err(Error::numerical(format!("step-size collapse at t = {t} (h = {h:e})")));
                }
            }
        }
        Ok(OdeOutcome {
            y,
            accepted,
            rejected,
            last_step,
        })
    }
}
