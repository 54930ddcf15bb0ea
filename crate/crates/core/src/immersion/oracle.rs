//! Closed-form flat surface and rigid comparison against the integrated grid.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::ImmersionGrid;
use crate::error::{Error, Result};
use crate::geometry::GluedMetric;
use crate::numeric::quadrature::{integrate, QuadOptions};
use crate::profile::SpaceFormSign;

/// Explicit non-CMC biconservative surface in `R^3`, conformal with factor `C cosh^6 u`.
pub fn explicit_immersion_eps0(u: f64, v: f64, c: f64) -> Result<[f64; 3]> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain(format!("explicit flat surface needs C > 0, got {c}")));
    }
    let s = c.sqrt();
    let ch3 = u.cosh().powi(3);
    Ok([
        s / 3.0 * ch3 * (3.0 * v).cos(),
        s / 3.0 * ch3 * (3.0 * v).sin(),
        s / 2.0 * (0.5 * (2.0 * u).sinh() + u),
    ])
}

/// Conformal coordinates of the explicit surface for one profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatOracleMap {
    /// Constant of the explicit surface.
    pub c_oracle: f64,
    /// `du = scale * F drho`, `dv = scale * dtheta`.
    pub scale: f64,
    /// Junction where `u = 0`.
    pub rho_origin: f64,
}

/// Maps `(rho, theta)` of the flat profile with constant `C` onto `(u, v)` of the explicit surface.
pub fn flat_oracle_coordinates(gm: &GluedMetric) -> Result<FlatOracleMap> {
    if gm.eps() != SpaceFormSign::Flat {
        return Err(Error::domain(format!("explicit oracle exists only for eps = 0, got eps = {}", gm.eps())));
    }
    let c = gm.c();
    Ok(FlatOracleMap {
        c_oracle: 27.0 / c.powi(4),
        scale: (3f64.sqrt() * c).sqrt() / (3.0 * 3f64.powf(0.75)),
        rho_origin: gm.profile().lattice().rho_minus,
    })
}

impl FlatOracleMap {
    /// `u` values at the given increasing `rho` nodes, by cumulative quadrature of `F`.
    pub fn u_values(&self, gm: &GluedMetric, rho: &[f64]) -> Result<Vec<f64>> {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-14,
            max_panels: 2000,
        };
        let f = |x: f64| gm.profile().eval_f(x);
        let mut out = Vec::with_capacity(rho.len());
        let mut acc = match rho.first() {
            Some(&r0) => integrate(f, self.rho_origin, r0, opts)?,
            None => return Ok(out),
        };
        out.push(self.scale * acc);
        for w in rho.windows(2) {
            acc += integrate(f, w[0], w[1], opts)?;
            out.push(self.scale * acc);
        }
        Ok(out)
    }
}

/// Rigid (rotation or reflection plus translation) fit of the grid to the explicit surface.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub c_oracle: f64,
    pub scale: f64,
    pub n_points: usize,
    pub max_distance: f64,
    pub rms_distance: f64,
    pub reflection: bool,
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    pub threshold: f64,
    pub passed: bool,
}

/// Best orthogonal `R` and `t` with `R q + t ~ p` (Kabsch; reflections allowed).
pub(crate) fn kabsch(p: &[[f64; 3]], q: &[[f64; 3]]) -> (Matrix3<f64>, Vector3<f64>) {
    let n = p.len() as f64;
    let pc = p.iter().fold(Vector3::zeros(), |a, x| a + Vector3::from(*x)) / n;
    let qc = q.iter().fold(Vector3::zeros(), |a, x| a + Vector3::from(*x)) / n;
    let mut h = Matrix3::zeros();
    for (a, b) in p.iter().zip(q) {
        h += (Vector3::from(*b) - qc) * (Vector3::from(*a) - pc).transpose();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let r = vt.transpose() * u.transpose();
    (r, pc - r * qc)
}

/// Aligns the integrated flat grid with the explicit surface and measures the distance.
pub fn compare_to_oracle(grid: &ImmersionGrid, gm: &GluedMetric) -> Result<OracleReport> {
    if grid.eps() != SpaceFormSign::Flat || gm.eps() != SpaceFormSign::Flat {
        return Err(Error::domain("oracle comparison requires eps = 0 for both grid and metric"));
    }
    let map = flat_oracle_coordinates(gm)?;
    let us = map.u_values(gm, &grid.rho)?;
    let mut ours = Vec::with_capacity(grid.frames.len());
    let mut exact = Vec::with_capacity(grid.frames.len());
    for (i, &u) in us.iter().enumerate() {
        for (j, &theta) in grid.theta.iter().enumerate() {
            let phi = grid.frame(i, j).phi;
            ours.push([phi[1], phi[2], phi[3]]);
            exact.push(explicit_immersion_eps0(u, map.scale * theta, map.c_oracle)?);
        }
    }
    let (r, t) = kabsch(&exact, &ours);
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    for (p, q) in exact.iter().zip(&ours) {
        let d = (r * Vector3::from(*q) + t - Vector3::from(*p)).norm();
        max = max.max(d);
        sum += d * d;
    }
    let n = ours.len();
    let mut rotation = [[0.0; 3]; 3];
    for (a, row) in rotation.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = r[(a, b)];
        }
    }
    Ok(OracleReport {
        c_oracle: map.c_oracle,
        scale: map.scale,
        n_points: n,
        max_distance: max,
        rms_distance: (sum / n as f64).sqrt(),
        reflection: r.determinant() < 0.0,
        rotation,
        translation: [t[0], t[1], t[2]],
        threshold: 1e-5,
        passed: max.is_finite() && max <= 1e-5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersion::tests::metric;
    use crate::immersion::{integrate_immersion, GridWindow, ImmersionOptions};

    #[test]
    fn explicit_surface_is_conformal() {
        let c = 0.7;
        let (u, v, h) = (0.4, 1.1, 1e-5);
        let p = |u, v| Vector3::from(explicit_immersion_eps0(u, v, c).unwrap());
        let pu = (p(u + h, v) - p(u - h, v)) / (2.0 * h);
        let pv = (p(u, v + h) - p(u, v - h)) / (2.0 * h);
        let lam = c * u.cosh().powi(6);
        assert!((pu.norm_squared() / lam - 1.0).abs() < 1e-9);
        assert!((pv.norm_squared() / lam - 1.0).abs() < 1e-9);
        assert!(pu.dot(&pv).abs() < 1e-9);
    }

    #[test]
    fn non_positive_constant_rejected() {
        assert!(matches!(explicit_immersion_eps0(0.0, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(flat_oracle_coordinates(&metric(SpaceFormSign::Spherical, 3.0)).is_err());
    }

    #[test]
    fn kabsch_recovers_reflection() {
        let q: Vec<[f64; 3]> = (0..20).map(|i| { let t = i as f64; [t.sin(), (0.3 * t).cos(), 0.1 * t] }).collect();
        let p: Vec<[f64; 3]> = q.iter().map(|x| [x[1] + 1.0, x[0] - 2.0, x[2]]).collect();
        let (r, t) = kabsch(&p, &q);
        assert!(r.determinant() < 0.0);
        for (a, b) in p.iter().zip(&q) {
            assert!((r * Vector3::from(*b) + t - Vector3::from(*a)).norm() < 1e-12);
        }
    }

    #[test]
    fn integrated_flat_surface_matches() {
        let gm = metric(SpaceFormSign::Flat, 1.0);
        let m = gm.profile().lattice().rho_minus;
        let w = GridWindow { rho_min: m - 1.0, rho_max: m + 1.5, n_rho: 41, theta_min: 0.0, theta_max: 2.0, n_theta: 21 };
        let g = integrate_immersion(&gm, &w, &ImmersionOptions::default()).unwrap();
        let rep = compare_to_oracle(&g, &gm).unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}
