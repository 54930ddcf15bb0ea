//! Intrinsic geometry of the glued metric `drho^2 + Gamma(rho)^2 dtheta^2`.
//!
//! Conventions: the orthonormal frame is `X1 = d/drho`, `X2 = (1/Gamma) d/dtheta`
//! on the whole surface. `omega_tilde = Gamma'/Gamma` is the connection
//! coefficient relative to that frame and `omega = |omega_tilde|` is the
//! curvature of the level circles of `K`. The Laplacian is the geometer's
//! (non-negative) operator, `Delta h = -(h'' + (Gamma'/Gamma) h')` for `h = h(rho)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gluing::{FJet, GluedProfile};
use crate::numeric::fd;
use crate::numeric::ode::Rkf78;
use crate::numeric::quadrature::{self, QuadOptions};
use crate::profile::{ProfileSolution, SpaceFormSign};
use crate::report::{GridSpec, ResidualReport};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Description of the Laplacian sign recorded in every report.
pub const LAPLACIAN_CONVENTION: &str = "Delta h = -(h'' + (Gamma'/Gamma) h'), non-negative spectrum";

/// The surface metric; owns the glued profile.
#[derive(Debug, Clone)]
pub struct GluedMetric {
    gp: GluedProfile,
}

/// Curvature data at one `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub rho: f64,
    pub k: f64,
    pub dk_drho: f64,
    pub d2k_drho2: f64,
    /// `3 |dK/drho| / (8 (eps - K))`, the level-circle curvature.
    pub omega: f64,
    /// `Gamma'/Gamma = 3 K' / (8 (eps - K))`, signed relative to `X1 = d/drho`.
    pub omega_tilde: f64,
}

/// Point and unit velocity of a geodesic together with elapsed arclength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub rho: f64,
    pub theta: f64,
    pub drho: f64,
    pub dtheta: f64,
    pub arclength: f64,
}

/// Residual of the metric's comparison with `m0 (drho^2 + dtheta^2)`.
#[derive(Debug, Clone, Serialize)]
pub struct CompletenessCheck {
    pub m0: f64,
    pub min_eigenvalue: f64,
    pub samples: usize,
    pub passed: bool,
}

impl GluedMetric {
    pub fn new(gp: GluedProfile) -> Self {
        Self { gp }
    }

    pub fn from_solution(sol: ProfileSolution) -> Self {
        Self::new(GluedProfile::new(sol))
    }

    pub fn profile(&self) -> &GluedProfile {
        &self.gp
    }

    pub fn eps(&self) -> SpaceFormSign {
        self.gp.eps()
    }

    pub fn c(&self) -> f64 {
        self.gp.solution().c()
    }

    fn epsv(&self) -> f64 {
        self.eps().value()
    }

    /// Metric matrix in `(rho, theta)` order.
    pub fn metric(&self, rho: f64) -> [[f64; 2]; 2] {
        let g = self.gp.eval_gamma(rho);
        [[1.0, 0.0], [0.0, g * g]]
    }

    /// `K = eps - F^(8/3) / 9`.
    pub fn gauss_curvature(&self, rho: f64) -> f64 {
        self.epsv() - self.gp.eval_f(rho).powf(8.0 / 3.0) / 9.0
    }

    fn sample_from_jet(&self, rho: f64, j: FJet, orientation: f64) -> CurvatureSample {
        let eps = self.epsv();
        let f = j.f;
        let k = eps - f.powf(8.0 / 3.0) / 9.0;
        let dk = -(8.0 / 27.0) * f.powf(5.0 / 3.0) * j.f1;
        let d2k = -(8.0 / 27.0) * ((5.0 / 3.0) * f.powf(2.0 / 3.0) * j.f1 * j.f1 + f.powf(5.0 / 3.0) * j.f2);
        let omega_tilde = -j.f1 / f;
        CurvatureSample {
            rho,
            k,
            dk_drho: dk,
            d2k_drho2: d2k,
            omega: orientation * omega_tilde,
            omega_tilde,
        }
    }

    /// Curvature sample from the interpolated profile.
    pub fn curvature(&self, rho: f64) -> CurvatureSample {
        let o = self.gp.reduce(rho).orientation;
        self.sample_from_jet(rho, self.gp.jet(rho), o)
    }

    /// Curvature sample from the polished inverse.
    pub fn curvature_precise(&self, rho: f64) -> Result<CurvatureSample> {
        let o = self.gp.reduce(rho).orientation;
        Ok(self.sample_from_jet(rho, self.gp.jet_precise(rho)?, o))
    }

    /// `d/dxi` coefficient of `grad K` in `(xi, theta)` coordinates on one block.
    pub fn grad_k_xi_form(&self, xi: f64) -> Result<f64> {
        let sol = self.gp.solution();
        if !(xi > sol.roots.xi01 && xi < sol.roots.xi02) {
            return Err(Error::domain(format!("xi = {xi} outside the open block")));
        }
        let t = sol.potential(xi);
        Ok(xi * xi * t / 3.0 * (-(8.0 / 27.0) * xi.powf(5.0 / 3.0)))
    }

    /// `|grad K|` computed in `(xi, theta)` coordinates, `|coef| sqrt(g_xixi)`.
    pub fn grad_k_norm_xi(&self, xi: f64) -> Result<f64> {
        let coef = self.grad_k_xi_form(xi)?;
        let t = self.gp.solution().potential(xi);
        Ok(coef.abs() * (3.0 / (xi * xi * t)).sqrt())
    }

    /// Level-circle curvature `3 K' s / (8 (eps - K))`, zero at junctions.
    pub fn omega(&self, rho: f64) -> f64 {
        self.curvature(rho).omega
    }

    /// `Gamma'/Gamma`.
    pub fn omega_tilde(&self, rho: f64) -> f64 {
        self.curvature(rho).omega_tilde
    }

    /// `alpha` solved from the first integral of the curvature ODE at `rho`.
    pub fn first_integral_alpha(&self, rho: f64) -> Result<f64> {
        if self.gp.reduce(rho).junction.is_some() {
            return Err(Error::domain(format!("rho = {rho} is a junction")));
        }
        let s = self.curvature_precise(rho)?;
        Ok(alpha_from(self.epsv(), s.k, s.dk_drho))
    }

    /// Closed-form value of the first-integral constant, `64 C / (3 sqrt 3)`.
    pub fn alpha_expected(&self) -> f64 {
        64.0 * self.c() / (3.0 * SQRT_3)
    }

    /// Junction guard half-width used by the verifiers.
    pub fn guard_band(&self) -> f64 {
        let sol = self.gp.solution();
        1e-4 * sol.block_width().unwrap_or(sol.width_ref())
    }

    /// Default verification window: one period, or a symmetric band around the junction.
    pub fn default_window(&self) -> (f64, f64) {
        let sol = self.gp.solution();
        let m = sol.rho_minus;
        match self.gp.period() {
            Some(p) => (m - 0.25 * p, m + 0.75 * p),
            None => (m - 2.0 * sol.width_ref(), m + 2.0 * sol.width_ref()),
        }
    }

    /// Uniform grid on `[a, b]` minus the junction guard bands.
    pub fn grid(&self, a: f64, b: f64, n: usize) -> (Vec<f64>, GridSpec) {
        let guard = self.guard_band();
        let junctions: Vec<f64> = self.gp.junctions_in(a - guard, b + guard).into_iter().map(|j| j.1).collect();
        let n = n.max(2);
        let mut pts = Vec::with_capacity(n);
        let mut excluded = 0;
        for i in 0..n {
            let x = a + (b - a) * i as f64 / (n - 1) as f64;
            if junctions.iter().any(|j| (x - j).abs() <= guard) {
                excluded += 1;
            } else {
                pts.push(x);
            }
        }
        (
            pts,
            GridSpec {
                rho_min: a,
                rho_max: b,
                n_rho: n,
                theta: None,
                excluded,
            },
        )
    }

    fn sweep<F>(&self, name: &str, a: f64, b: f64, n: usize, threshold: f64, f: F) -> Result<ResidualReport>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let (pts, spec) = self.grid(a, b, n);
        let res: Vec<f64> = pts.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
        Ok(ResidualReport::from_residuals(name, spec, &res, self.guard_band(), LAPLACIAN_CONVENTION, threshold))
    }

    /// Residual of `24 (eps-K) K'' + 33 K'^2 + 64 K (eps-K)^2`, scaled by `max(1, |K|^3)`.
    pub fn verify_curvature_ode(&self, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
        let eps = self.epsv();
        self.sweep("curvature_ode", a, b, n, 1e-6, |x| {
            let s = self.curvature_precise(x)?;
            Ok(curvature_ode_residual(eps, &s))
        })
    }

    /// Spread of `alpha` relative to `64 C / (3 sqrt 3)`.
    pub fn verify_first_integral(&self, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
        let expected = self.alpha_expected();
        let eps = self.epsv();
        self.sweep("first_integral_alpha", a, b, n, 1e-6, |x| {
            let s = self.curvature_precise(x)?;
            Ok((alpha_from(eps, s.k, s.dk_drho) - expected) / expected.abs().max(1.0))
        })
    }

    /// Residual of `(eps-K) Delta K - |grad K|^2 - (8/3) K (eps-K)^2`, scaled by `max(1, |K|^3)`.
    pub fn verify_laplace_identity(&self, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
        let eps = self.epsv();
        self.sweep("laplace_identity", a, b, n, 1e-6, |x| {
            let s = self.curvature_precise(x)?;
            Ok(laplace_residual(eps, &s))
        })
    }

    /// Residual of `f Delta f + |grad f|^2 + (4/3) eps f^2 - f^4` with `f^2 = (4/3)(eps - K)`.
    pub fn verify_bicons_pde(&self, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
        let eps = self.epsv();
        self.sweep("biconservative_pde", a, b, n, 1e-6, |x| {
            let j = self.gp.jet_precise(x)?;
            Ok(bicons_residual(eps, &j))
        })
    }

    /// `f = sqrt((4/3)(eps - K)) = 2 F^(4/3) / (3 sqrt 3)`.
    pub fn mean_curvature_f(&self, rho: f64) -> f64 {
        2.0 * self.gp.eval_f(rho).powf(4.0 / 3.0) / (3.0 * SQRT_3)
    }

    /// `K = -Gamma''/Gamma` from the warping function, relative mismatch.
    pub fn verify_warped_curvature(&self, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
        let eps = self.epsv();
        self.sweep("warped_product_curvature", a, b, n, 1e-6, |x| {
            let j = self.gp.jet_precise(x)?;
            let k = eps - j.f.powf(8.0 / 3.0) / 9.0;
            // Gamma = 1/F: -Gamma''/Gamma = F''/F - 2 F'^2 / F^2
            let warped = j.f2 / j.f - 2.0 * j.f1 * j.f1 / (j.f * j.f);
            Ok((warped - k) / k.abs().max(1.0))
        })
    }

    /// `|omega| = 3 |grad K| / (8 (eps - K))` with `|grad K|` taken from the `xi` form.
    pub fn verify_omega_kappa(&self, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
        self.sweep("omega_equals_kappa", a, b, n, 1e-9, |x| {
            let s = self.curvature_precise(x)?;
            let xi = self.gp.eval_f_precise(x)?;
            let kappa = 3.0 * self.grad_k_norm_xi(xi)? / (8.0 * (self.epsv() - s.k));
            Ok((s.omega.abs() - kappa) / kappa.max(1.0))
        })
    }

    /// Frame relations checked against Christoffel symbols obtained by differencing `g_thetatheta`.
    ///
    /// The residual is the largest deviation among the four covariant derivatives
    /// `nabla_{Xi} Xj` from `(0, 0, omega_tilde X2, -omega_tilde X1)`.
    pub fn verify_frame_relations(&self, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
        let h = 1e-3 * self.gp.solution().block_width().unwrap_or(self.gp.solution().width_ref()).min(1.0);
        self.sweep("frame_relations", a, b, n, 1e-8, |x| {
            let offsets: Vec<f64> = (-4..=4).map(|k| k as f64 * h).collect();
            let g: Vec<f64> = offsets
                .iter()
                .map(|d| self.gp.eval_f_precise(x + d).map(|f| 1.0 / (f * f)))
                .collect::<Result<Vec<f64>>>()?;
            let d = fd::apply(0.0, &offsets, &g, 1);
            let (gtt, dgtt) = (d[0], d[1]);
            // Christoffel symbols of drho^2 + g_tt dtheta^2
            let chr_rho_tt = -0.5 * dgtt;
            let chr_t_rt = 0.5 * dgtt / gtt;
            let gamma = gtt.sqrt();
            let dgamma = 0.5 * dgtt / gamma;
            let w = self.curvature_precise(x)?.omega_tilde;
            // nabla_{X1} X1 = 0 identically (no Christoffel term); X2 = (1/Gamma) d_theta.
            let n11: f64 = 0.0;
            // X2 components of nabla_{X1} X2 and nabla_{X2} X1, X1 component of nabla_{X2} X2
            let n12 = gamma * (-dgamma / (gamma * gamma) + chr_t_rt / gamma);
            let n21 = chr_t_rt;
            let n22 = chr_rho_tt / (gamma * gamma);
            let scale = w.abs().max(1.0);
            Ok([n11, n12, n21 - w, n22 + w]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
                / scale)
        })
    }

    /// Residual of the isothermal reduction `sigma'' = e^{-2 sigma/3} - eps e^{2 sigma}`
    /// plus the first integral `a = sigma'^2 + 3 e^{-2 sigma/3} + eps e^{2 sigma} = C sqrt 3`.
    pub fn verify_isothermal_form(&self, a: f64, b: f64, n: usize) -> Result<IsothermalReport> {
        let eps = self.epsv();
        let a_expected = self.c() * SQRT_3;
        let q = 3f64.powf(0.75);
        let (pts, spec) = self.grid(a, b, n);
        let rows: Vec<(f64, f64, f64)> = pts
            .par_iter()
            .map(|&x| {
                let j = self.gp.jet_precise(x)?;
                let o = self.gp.reduce(x).orientation;
                let sigma = (q / j.f).ln();
                let ds = o * (-j.f1 / j.f) * (q / j.f);
                let d2s = -q * (j.f2 / (j.f * j.f) - 2.0 * j.f1 * j.f1 / j.f.powi(3)) * q / j.f;
                let res = d2s - (-2.0 * sigma / 3.0).exp() + eps * (2.0 * sigma).exp();
                let a_loc = ds * ds + 3.0 * (-2.0 * sigma / 3.0).exp() + eps * (2.0 * sigma).exp();
                Ok((res, ds, (a_loc - a_expected) / a_expected.abs().max(1.0)))
            })
            .collect::<Result<Vec<_>>>()?;
        let res: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let a_err: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let sigma_prime_min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let ode = ResidualReport::from_residuals("isothermal_sigma_ode", spec.clone(), &res, self.guard_band(), LAPLACIAN_CONVENTION, 1e-6);
        let first = ResidualReport::from_residuals("isothermal_first_integral", spec, &a_err, self.guard_band(), LAPLACIAN_CONVENTION, 1e-7);
        let u_check = self.isothermal_u_quadrature()?;
        Ok(IsothermalReport {
            passed: ode.passed && first.passed && sigma_prime_min > 0.0 && u_check.passed,
            ode,
            first_integral: first,
            sigma_prime_min,
            u_quadrature: u_check,
        })
    }

    /// Compares `u` reconstructed from `du = d sigma / sqrt(a - 3 e^{-2 sigma/3} - eps e^{2 sigma})`
    /// with `du = F d rho / 3^{3/4}` between two interior points of one block.
    fn isothermal_u_quadrature(&self) -> Result<UQuadratureCheck> {
        let eps = self.epsv();
        let q = 3f64.powf(0.75);
        let aa = self.c() * SQRT_3;
        // An interior stretch of the base block.
        let sol = self.gp.solution();
        let m = sol.rho_minus;
        let hi = sol.rho_plus.finite().unwrap_or(m + 2.0 * sol.width_ref());
        let (r0, r1) = (m + 0.2 * (hi - m), m + 0.8 * (hi - m));
        let from_rho = quadrature::integrate(
            |x| self.gp.eval_f_precise(x).unwrap_or(f64::NAN) / q,
            r0,
            r1,
            QuadOptions::default(),
        )?;
        let s0 = (q / self.gp.eval_f_precise(r0)?).ln();
        let s1 = (q / self.gp.eval_f_precise(r1)?).ln();
        let from_sigma = quadrature::integrate(
            |s| 1.0 / (aa - 3.0 * (-2.0 * s / 3.0).exp() - eps * (2.0 * s).exp()).sqrt(),
            s0,
            s1,
            QuadOptions::default(),
        )?;
        let rel = (from_rho - from_sigma).abs() / from_rho.abs();
        Ok(UQuadratureCheck {
            rho_interval: (r0, r1),
            u_from_rho: from_rho,
            u_from_sigma: from_sigma,
            relative_mismatch: rel,
            passed: rel <= 1e-7,
        })
    }

    /// `g - m0 (drho^2 + dtheta^2)` is positive semi-definite with `m0 = min(1/xi02^2, 1)`.
    pub fn completeness_check(&self, a: f64, b: f64, n: usize) -> CompletenessCheck {
        let xi02 = self.gp.solution().roots.xi02;
        let m0 = (1.0 / (xi02 * xi02)).min(1.0);
        let n = n.max(2);
        let min_eig = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = a + (b - a) * i as f64 / (n - 1) as f64;
                let g = self.metric(x);
                (g[0][0] - m0).min(g[1][1] - m0)
            })
            .reduce(|| f64::INFINITY, f64::min);
        // Rounding: Gamma^2 equals 1/xi02^2 exactly only at junctions.
        CompletenessCheck {
            m0,
            min_eigenvalue: min_eig,
            samples: n,
            passed: min_eig >= -4.0 * f64::EPSILON * m0,
        }
    }

    /// Geodesic right-hand side in `(rho, theta, u, w)` with velocity `u X1 + w X2`,
    /// i.e. `u = rho'` and `w = Gamma theta'`. Both stay of order one where `Gamma` is huge.
    fn geodesic_rhs(&self, y: &[f64; 4]) -> [f64; 4] {
        let j = self.gp.jet(y[0]);
        let w = -j.f1 / j.f; // Gamma'/Gamma
        [y[2], y[3] * j.f, w * y[3] * y[3], -w * y[2] * y[3]]
    }

    /// Integrates a unit-speed geodesic for `length`, returning `stations + 1` evenly spaced states.
    pub fn geodesic_integrate(&self, start: GeodesicState, length: f64, stations: usize) -> Result<Vec<GeodesicState>> {
        let gamma = self.gp.eval_gamma(start.rho);
        let speed = start.drho * start.drho + gamma * gamma * start.dtheta * start.dtheta;
        if (speed - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("initial velocity must be unit, |v|^2 = {speed}")));
        }
        if !(length >= 0.0) {
            return Err(Error::domain("geodesic length must be non-negative"));
        }
        let solver = Rkf78 {
            initial_step: Some(0.05),
            // w decays like 1/Gamma down a funnel; only a relative tolerance keeps Clairaut's quantity.
            ..Rkf78::with_tolerance(1e-12, f64::MIN_POSITIVE)
        };
        let stations = stations.max(1);
        let mut out = Vec::with_capacity(stations + 1);
        out.push(start);
        let mut y = [start.rho, start.theta, start.drho, gamma * start.dtheta];
        let mut s = start.arclength;
        let ds = length / stations as f64;
        let mut h = 0.05;
        for _ in 0..stations {
            let res = Rkf78 { initial_step: Some(h), ..solver }.integrate(|_, y: &[f64; 4]| self.geodesic_rhs(y), s, y, s + ds)?;
            y = res.y;
            if res.last_step != 0.0 {
                h = res.last_step.abs();
            }
            s += ds;
            out.push(GeodesicState {
                rho: y[0],
                theta: y[1],
                drho: y[2],
                dtheta: y[3] / self.gp.eval_gamma(y[0]),
                arclength: s,
            });
        }
        Ok(out)
    }

    /// Unit-speed state with velocity making angle `phi` with `d/drho`.
    pub fn unit_state(&self, rho: f64, theta: f64, phi: f64) -> GeodesicState {
        let gamma = self.gp.eval_gamma(rho);
        GeodesicState {
            rho,
            theta,
            drho: phi.cos(),
            dtheta: phi.sin() / gamma,
            arclength: 0.0,
        }
    }

    /// Clairaut quantity `Gamma^2 theta'`.
    pub fn clairaut(&self, s: &GeodesicState) -> f64 {
        let g = self.gp.eval_gamma(s.rho);
        g * g * s.dtheta
    }

    /// `rho'^2 + Gamma^2 theta'^2`.
    pub fn speed_squared(&self, s: &GeodesicState) -> f64 {
        let g = self.gp.eval_gamma(s.rho);
        s.drho * s.drho + g * g * s.dtheta * s.dtheta
    }
}

/// Outcome of a batch of unit-speed geodesic probes.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicProbeReport {
    pub probes: usize,
    pub failures: usize,
    pub length: f64,
    pub max_speed_drift: f64,
    pub max_clairaut_drift: f64,
    pub junction_lines: usize,
    /// Largest `|rho - rho_junction|` along geodesics started tangent to a junction line.
    pub max_junction_departure: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl GluedMetric {
    /// Integrates unit-speed geodesics from `(rho, theta, angle)` starts to arclength
    /// `length`, plus one geodesic along each junction line in `[a, b]`.
    pub fn geodesic_probes(&self, starts: &[(f64, f64, f64)], length: f64, junction_window: (f64, f64)) -> GeodesicProbeReport {
        const STATIONS: usize = 50;
        let runs: Vec<Option<(f64, f64)>> = starts
            .par_iter()
            .map(|&(rho, theta, phi)| {
                let st = self.unit_state(rho, theta, phi);
                let c0 = self.clairaut(&st);
                let traj = self.geodesic_integrate(st, length, STATIONS).ok()?;
                let mut speed: f64 = 0.0;
                let mut clairaut: f64 = 0.0;
                for s in &traj {
                    let (v, c) = (self.speed_squared(s), self.clairaut(s));
                    if !(v.is_finite() && c.is_finite()) {
                        return None;
                    }
                    speed = speed.max((v - 1.0).abs());
                    clairaut = clairaut.max((c - c0).abs() / c0.abs().max(1.0));
                }
                Some((speed, clairaut))
            })
            .collect();
        let failures = runs.iter().filter(|r| r.is_none()).count();
        let (max_speed, max_clairaut) = runs
            .iter()
            .flatten()
            .fold((0.0f64, 0.0f64), |(a, b), &(s, c)| (a.max(s), b.max(c)));
        let junctions = self.gp.junctions_in(junction_window.0, junction_window.1);
        let departures: Vec<f64> = junctions
            .par_iter()
            .map(|&(_, rj)| {
                match self.geodesic_integrate(self.unit_state(rj, 0.0, std::f64::consts::FRAC_PI_2), length, STATIONS) {
                    Ok(traj) => traj.iter().map(|s| (s.rho - rj).abs()).fold(0.0, f64::max),
                    Err(_) => f64::INFINITY,
                }
            })
            .collect();
        let departure = departures.iter().copied().fold(0.0, f64::max);
        let threshold = 1e-8;
        GeodesicProbeReport {
            probes: starts.len(),
            failures,
            length,
            max_speed_drift: max_speed,
            max_clairaut_drift: max_clairaut,
            junction_lines: junctions.len(),
            max_junction_departure: departure,
            threshold,
            passed: failures == 0 && max_speed <= threshold && max_clairaut <= threshold && departure <= threshold,
        }
    }
}

/// Isothermal-coordinate checks on one window.
#[derive(Debug, Clone, Serialize)]
pub struct IsothermalReport {
    pub ode: ResidualReport,
    pub first_integral: ResidualReport,
    pub sigma_prime_min: f64,
    pub u_quadrature: UQuadratureCheck,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UQuadratureCheck {
    pub rho_interval: (f64, f64),
    pub u_from_rho: f64,
    pub u_from_sigma: f64,
    pub relative_mismatch: f64,
    pub passed: bool,
}

pub(crate) fn alpha_from(eps: f64, k: f64, dk: f64) -> f64 {
    let e2 = eps * eps;
    (dk * dk - (64.0 / 3.0) * k.powi(3) + (640.0 / 9.0) * eps * k * k - (704.0 / 9.0) * e2 * k + (256.0 / 9.0) * e2 * eps)
        / (eps - k).powf(11.0 / 4.0)
}

pub(crate) fn curvature_ode_residual(eps: f64, s: &CurvatureSample) -> f64 {
    let d = eps - s.k;
    (24.0 * d * s.d2k_drho2 + 33.0 * s.dk_drho * s.dk_drho + 64.0 * s.k * d * d) / s.k.abs().powi(3).max(1.0)
}

pub(crate) fn laplace_residual(eps: f64, s: &CurvatureSample) -> f64 {
    let d = eps - s.k;
    let lap = -(s.d2k_drho2 + s.omega_tilde * s.dk_drho);
    (d * lap - s.dk_drho * s.dk_drho - (8.0 / 3.0) * s.k * d * d) / s.k.abs().powi(3).max(1.0)
}

pub(crate) fn bicons_residual(eps: f64, j: &FJet) -> f64 {
    let c0 = 2.0 / (3.0 * SQRT_3);
    let f = c0 * j.f.powf(4.0 / 3.0);
    let df = c0 * (4.0 / 3.0) * j.f.powf(1.0 / 3.0) * j.f1;
    let d2f = c0 * (4.0 / 3.0) * ((1.0 / 3.0) * j.f.powf(-2.0 / 3.0) * j.f1 * j.f1 + j.f.powf(1.0 / 3.0) * j.f2);
    let w = -j.f1 / j.f;
    let lap = -(d2f + w * df);
    let f2 = f * f;
    (f * lap + df * df + (4.0 / 3.0) * eps * f2 - f2 * f2) / f2.max(1.0).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileParams;

    fn metric(eps: SpaceFormSign, c: f64) -> GluedMetric {
        GluedMetric::from_solution(ProfileSolution::build(ProfileParams::new(eps, c)).unwrap())
    }

    fn defaults() -> Vec<GluedMetric> {
        vec![
            metric(SpaceFormSign::Hyperbolic, 0.0),
            metric(SpaceFormSign::Flat, 1.0),
            metric(SpaceFormSign::Spherical, 3.0),
        ]
    }

    #[test]
    fn junction_curvature_hyperbolic() {
        let g = metric(SpaceFormSign::Hyperbolic, 0.0);
        let m = g.profile().lattice().rho_minus;
        assert!((g.gauss_curvature(m) + 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(g.omega(m), 0.0);
    }

    #[test]
    fn intrinsic_identities_hold() {
        for g in defaults() {
            let (a, b) = g.default_window();
            for rep in [
                g.verify_curvature_ode(a, b, 400).unwrap(),
                g.verify_laplace_identity(a, b, 400).unwrap(),
                g.verify_bicons_pde(a, b, 400).unwrap(),
                g.verify_first_integral(a, b, 400).unwrap(),
                g.verify_warped_curvature(a, b, 400).unwrap(),
                g.verify_omega_kappa(a, b, 400).unwrap(),
                g.verify_frame_relations(a, b, 200).unwrap(),
            ] {
                assert!(rep.passed, "eps {}: {}", g.eps(), rep.summary());
            }
        }
    }

    #[test]
    fn analyst_laplacian_sign_fails() {
        let g = metric(SpaceFormSign::Spherical, 3.0);
        let s = g.curvature_precise(0.3).unwrap();
        let d = 1.0 - s.k;
        let wrong = d * (s.d2k_drho2 + s.omega_tilde * s.dk_drho) - s.dk_drho.powi(2) - (8.0 / 3.0) * s.k * d * d;
        assert!(wrong.abs() > 1e-2);
        assert!(laplace_residual(1.0, &s).abs() < 1e-9);
    }

    #[test]
    fn alpha_flat_unit() {
        let g = metric(SpaceFormSign::Flat, 1.0);
        assert!((g.alpha_expected() - 12.316_805_742_712_9).abs() < 1e-9);
        let m = g.profile().lattice().rho_minus;
        assert!(g.first_integral_alpha(m).is_err());
    }

    #[test]
    fn isothermal_flat() {
        let g = metric(SpaceFormSign::Flat, 1.0);
        let m = g.profile().lattice().rho_minus;
        let rep = g.verify_isothermal_form(m + 0.1, m + 5.0, 300).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn junction_line_is_geodesic() {
        let g = metric(SpaceFormSign::Spherical, 3.0);
        let m = g.profile().lattice().rho_minus;
        let traj = g.geodesic_integrate(g.unit_state(m, 0.0, std::f64::consts::FRAC_PI_2), 50.0, 10).unwrap();
        for s in &traj {
            assert!((s.rho - m).abs() < 1e-8);
        }
    }

    #[test]
    fn clairaut_is_conserved() {
        let g = metric(SpaceFormSign::Spherical, 3.0);
        let start = g.unit_state(0.1, 0.0, 0.7);
        let c0 = g.clairaut(&start);
        let traj = g.geodesic_integrate(start, 100.0, 20).unwrap();
        for s in &traj {
            assert!((g.clairaut(s) - c0).abs() < 1e-8);
            assert!((g.speed_squared(s) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn completeness_bound() {
        for g in defaults() {
            let (a, b) = g.default_window();
            assert!(g.completeness_check(a, b, 500).passed);
        }
    }
}
