//! Checks on the integrated immersion computed from the node positions alone.
//!
//! Derivatives of `Phi` come from 9-point finite-difference stencils on the
//! uniform grid (shifted to stay inside it near the edges).

use serde::Serialize;

use super::{ImmersionGrid, Vec4};
use crate::geometry::{GluedMetric, LAPLACIAN_CONVENTION};
use crate::numeric::fd::fornberg_weights;
use crate::report::{GridSpec, ResidualReport};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const STENCIL: usize = 9;

/// Extrinsic residual reports for one grid.
#[derive(Debug, Clone, Serialize)]
pub struct ExtrinsicReport {
    pub frame_gram: ResidualReport,
    pub constraint: ResidualReport,
    pub induced_metric: ResidualReport,
    pub mean_curvature: ResidualReport,
    pub gauss_equation: ResidualReport,
    /// Smallest extrinsic `trace A` seen; positive when `N` has the right orientation.
    pub min_mean_curvature: f64,
    pub passed: bool,
}

impl ExtrinsicReport {
    pub fn reports(&self) -> [&ResidualReport; 5] {
        [&self.frame_gram, &self.constraint, &self.induced_metric, &self.mean_curvature, &self.gauss_equation]
    }
}

/// Per-index stencil `(first node, weights for orders 0..=2)` on a uniform grid.
fn stencils(nodes: &[f64]) -> Vec<(usize, Vec<Vec<f64>>)> {
    let n = nodes.len();
    let width = STENCIL.min(n);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let w = fornberg_weights(nodes[i], &nodes[start..start + width], 2.min(width - 1));
            (start, w)
        })
        .collect()
}

fn combine(weights: &[f64], pick: impl Fn(usize) -> Vec4) -> Vec4 {
    let mut out = [0.0; 4];
    for (k, w) in weights.iter().enumerate() {
        let p = pick(k);
        for c in 0..4 {
            out[c] += w * p[c];
        }
    }
    out
}

/// Frame drift, ambient constraint, induced metric, mean curvature and the Gauss equation.
pub fn extrinsic_checks(grid: &ImmersionGrid, gm: &GluedMetric) -> ExtrinsicReport {
    let model = grid.model;
    let (nr, nt) = (grid.rho.len(), grid.theta.len());
    let spec = GridSpec {
        rho_min: grid.window.rho_min,
        rho_max: grid.window.rho_max,
        n_rho: nr,
        theta: Some((grid.window.theta_min, grid.window.theta_max, nt)),
        excluded: 0,
    };
    let report = |name: &str, res: &[f64], tol: f64| {
        ResidualReport::from_residuals(name, spec.clone(), res, 0.0, LAPLACIAN_CONVENTION, tol)
    };
    let pos = |i: usize, j: usize| grid.frame(i, j).phi;

    let sr = stencils(&grid.rho);
    let st = stencils(&grid.theta);

    // d/dtheta of Phi at every node, needed again for the mixed derivative.
    let mut phi_t = vec![[0.0; 4]; nr * nt];
    for i in 0..nr {
        for j in 0..nt {
            let (s, w) = &st[j];
            phi_t[i * nt + j] = combine(&w[1], |k| pos(i, s + k));
        }
    }

    let mut gram = Vec::with_capacity(nr * nt);
    let mut constraint = Vec::with_capacity(nr * nt);
    let mut metric = Vec::with_capacity(nr * nt);
    let mut mean = Vec::with_capacity(nr * nt);
    let mut gauss = Vec::with_capacity(nr * nt);
    let mut min_f = f64::INFINITY;
    let eps = model.eps.value();
    let target = model.constraint();

    for i in 0..nr {
        let rho = grid.rho[i];
        let gamma = gm.profile().eval_gamma(rho);
        let f_expected = 2.0 * gm.profile().eval_f(rho).powf(4.0 / 3.0) / (3.0 * SQRT_3);
        let k_intrinsic = gm.gauss_curvature(rho);
        let (sri, wr) = &sr[i];
        for j in 0..nt {
            let fr = grid.frame(i, j);
            gram.push(grid.drift[i * nt + j].post_correction);
            let phi_sq: f64 = fr.phi.iter().map(|x| x * x).sum();
            constraint.push(target.map_or(0.0, |c| (model.inner(&fr.phi, &fr.phi) - c) / phi_sq.max(1.0)));

            let (stj, wt) = &st[j];
            let d_r = combine(&wr[1], |k| pos(sri + k, j));
            let d_rr = combine(&wr[2], |k| pos(sri + k, j));
            let d_t = phi_t[i * nt + j];
            let d_tt = combine(&wt[2], |k| pos(i, stj + k));
            let d_rt = combine(&wr[1], |k| phi_t[(sri + k) * nt + j]);

            let g11 = model.inner(&d_r, &d_r);
            let g12 = model.inner(&d_r, &d_t);
            let g22 = model.inner(&d_t, &d_t);
            metric.push(
                (g11 - 1.0)
                    .abs()
                    .max((g12 / gamma).abs())
                    .max((g22 / (gamma * gamma) - 1.0).abs()),
            );

            let h11 = model.inner(&d_rr, &fr.n);
            let h22 = model.inner(&d_tt, &fr.n) / (gamma * gamma);
            let h12 = model.inner(&d_rt, &fr.n) / gamma;
            let f_ext = h11 + h22;
            min_f = min_f.min(f_ext);
            mean.push((f_ext - f_expected) / f_expected.abs().max(1.0));
            let k_ext = eps + h11 * h22 - h12 * h12;
            gauss.push((k_ext - k_intrinsic) / k_intrinsic.abs().max(1.0));
        }
    }

    let frame_gram = report("frame_gram_drift", &gram, 1e-7);
    let constraint = report("ambient_constraint", &constraint, 1e-8);
    let induced_metric = report("induced_metric", &metric, 1e-7);
    let mean_curvature = report("extrinsic_mean_curvature", &mean, 1e-7);
    let gauss_equation = report("extrinsic_gauss_equation", &gauss, 1e-6);
    let passed = frame_gram.passed
        && constraint.passed
        && induced_metric.passed
        && mean_curvature.passed
        && gauss_equation.passed
        && min_f > 0.0;
    ExtrinsicReport {
        frame_gram,
        constraint,
        induced_metric,
        mean_curvature,
        gauss_equation,
        min_mean_curvature: min_f,
        passed,
    }
}
