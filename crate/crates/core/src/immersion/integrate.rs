//! Moving-frame integration of the immersion on a `(rho, theta)` grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_matrix, AmbientModel, Direction, FrameCoefficients, FrameState};
use crate::error::{Error, Result};
use crate::geometry::GluedMetric;
use crate::numeric::ode::Rkf78;
use crate::profile::SpaceFormSign;

/// Rectangular parameter window with node counts (both ends included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridWindow {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_rho: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_theta: usize,
}

impl GridWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_max > self.rho_min && self.theta_max > self.theta_min) {
            return Err(Error::domain("grid window must have positive extent in rho and theta"));
        }
        if self.n_rho < 2 || self.n_theta < 2 {
            return Err(Error::domain("grid needs at least two nodes per direction"));
        }
        if !(self.rho_min.is_finite() && self.rho_max.is_finite() && self.theta_min.is_finite() && self.theta_max.is_finite()) {
            return Err(Error::domain("grid window must be finite"));
        }
        Ok(())
    }

    pub fn rho_nodes(&self) -> Vec<f64> {
        linspace(self.rho_min, self.rho_max, self.n_rho)
    }

    pub fn theta_nodes(&self) -> Vec<f64> {
        linspace(self.theta_min, self.theta_max, self.n_theta)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImmersionOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Frame re-orthonormalization cadence in grid steps along a line.
    pub correction_every: usize,
    /// Pre-correction Gram drift that aborts the integration.
    pub drift_cap: f64,
}

impl Default for ImmersionOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            correction_every: 16,
            drift_cap: 1e-5,
        }
    }
}

/// Drift of the frame Gram matrix at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeDiagnostics {
    pub pre_correction: f64,
    pub post_correction: f64,
}

/// Frames at every node, stored row-major in `(rho, theta)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImmersionGrid {
    pub model: AmbientModel,
    pub window: GridWindow,
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
    pub frames: Vec<FrameState>,
    pub drift: Vec<NodeDiagnostics>,
}

impl ImmersionGrid {
    pub fn eps(&self) -> SpaceFormSign {
        self.model.eps
    }

    pub fn index(&self, i_rho: usize, j_theta: usize) -> usize {
        i_rho * self.theta.len() + j_theta
    }

    pub fn frame(&self, i_rho: usize, j_theta: usize) -> &FrameState {
        &self.frames[self.index(i_rho, j_theta)]
    }

    pub fn max_pre_drift(&self) -> f64 {
        self.drift.iter().map(|d| d.pre_correction).fold(0.0, f64::max)
    }

    pub fn max_post_drift(&self) -> f64 {
        self.drift.iter().map(|d| d.post_correction).fold(0.0, f64::max)
    }

    /// Largest `|<Phi, Phi> - eps|` over the grid (zero for the flat model), scaled like the Gram drift.
    pub fn max_constraint_error(&self) -> f64 {
        match self.model.constraint() {
            None => 0.0,
            Some(c) => self
                .frames
                .iter()
                .map(|f| (self.model.inner(&f.phi, &f.phi) - c).abs() / f.phi.iter().map(|x| x * x).sum::<f64>().max(1.0))
                .fold(0.0, f64::max),
        }
    }
}

/// Re-orthonormalizes the frame to the target Gram matrix.
///
/// Uses the iteration `X <- (I - delta J / 2) X` with `delta = X eta X^T - J`,
/// which converges quadratically for any signature.
pub(crate) fn gram_correct(state: &FrameState, model: &AmbientModel) -> FrameState {
    let mut rows = state.rows();
    let target = model.gram_target();
    let start = if model.eps == SpaceFormSign::Flat { 1 } else { 0 };
    for _ in 0..4 {
        let mut delta = [[0.0; 4]; 4];
        let mut worst: f64 = 0.0;
        for i in start..4 {
            for j in start..4 {
                let want = if i == j { target[i] } else { 0.0 };
                delta[i][j] = model.inner(&rows[i], &rows[j]) - want;
                worst = worst.max(delta[i][j].abs());
            }
        }
        if worst < 1e-16 {
            break;
        }
        let old = rows;
        for i in start..4 {
            for k in start..4 {
                let w = 0.5 * delta[i][k] * target[k];
                for c in 0..4 {
                    rows[i][c] -= w * old[k][c];
                }
            }
        }
    }
    FrameState::from_rows(&rows)
}

struct LineIntegrator<'a> {
    gm: &'a GluedMetric,
    model: AmbientModel,
    opts: ImmersionOptions,
}

impl LineIntegrator<'_> {
    fn solver(&self) -> Rkf78 {
        Rkf78::with_tolerance(self.opts.rel_tol, self.opts.abs_tol)
    }

    /// Integrates along `rho` through `nodes`, starting from `start` at `nodes[0]`.
    fn along_rho(&self, start: FrameState, nodes: &[f64]) -> Result<Vec<(FrameState, NodeDiagnostics)>> {
        let solver = self.solver();
        let mut out = Vec::with_capacity(nodes.len());
        let mut y = start.to_flat();
        out.push((start, NodeDiagnostics { pre_correction: start.gram_drift(&self.model), post_correction: start.gram_drift(&self.model) }));
        for (k, w) in nodes.windows(2).enumerate() {
            let res = solver.integrate(
                |t, y: &[f64; 16]| apply_matrix(&FrameCoefficients::at(self.gm, t).matrix(Direction::Rho), y),
                w[0],
                y,
                w[1],
            )?;
            let (state, diag) = self.finish_step(FrameState::from_flat(&res.y), k + 1, nodes.len(), w[1])?;
            y = state.to_flat();
            out.push((state, diag));
        }
        Ok(out)
    }

    /// Integrates along `theta` at fixed `rho`; the coefficients are constant on the line.
    fn along_theta(&self, start: FrameState, rho: f64, nodes: &[f64], start_diag: NodeDiagnostics) -> Result<Vec<(FrameState, NodeDiagnostics)>> {
        let solver = self.solver();
        let m = FrameCoefficients::at(self.gm, rho).matrix(Direction::Theta);
        let mut out = Vec::with_capacity(nodes.len());
        let mut y = start.to_flat();
        out.push((start, start_diag));
        for (k, w) in nodes.windows(2).enumerate() {
            let res = solver.integrate(|_, y: &[f64; 16]| apply_matrix(&m, y), w[0], y, w[1])?;
            let (state, diag) = self.finish_step(FrameState::from_flat(&res.y), k + 1, nodes.len(), rho)?;
            y = state.to_flat();
            out.push((state, diag));
        }
        Ok(out)
    }

    fn finish_step(&self, state: FrameState, step: usize, n_nodes: usize, at: f64) -> Result<(FrameState, NodeDiagnostics)> {
        let pre = state.gram_drift(&self.model);
        if !(pre <= self.opts.drift_cap) {
            return Err(Error::IntegrationQuality(format!(
                "frame drift {pre:e} exceeds cap {:e} near rho/theta = {at}",
                self.opts.drift_cap
            )));
        }
        let every = self.opts.correction_every.max(1);
        let corrected = if step % every == 0 || step + 1 == n_nodes { gram_correct(&state, &self.model) } else { state };
        let post = corrected.gram_drift(&self.model);
        Ok((corrected, NodeDiagnostics { pre_correction: pre, post_correction: post }))
    }
}

/// Integrates the frame ODE along the `theta = theta_min` spine in `rho`,
/// then along every `theta`-line (in parallel).
pub fn integrate_immersion(gm: &GluedMetric, window: &GridWindow, opts: &ImmersionOptions) -> Result<ImmersionGrid> {
    window.validate()?;
    let model = AmbientModel::new(gm.eps());
    let li = LineIntegrator { gm, model, opts: *opts };
    let rho = window.rho_nodes();
    let theta = window.theta_nodes();
    let spine = li.along_rho(model.initial_frame(), &rho)?;
    let lines: Vec<Vec<(FrameState, NodeDiagnostics)>> = spine
        .par_iter()
        .zip(rho.par_iter())
        .map(|(&(s, d), &r)| li.along_theta(s, r, &theta, d))
        .collect::<Result<_>>()?;
    let mut frames = Vec::with_capacity(rho.len() * theta.len());
    let mut drift = Vec::with_capacity(rho.len() * theta.len());
    for line in lines {
        for (f, d) in line {
            frames.push(f);
            drift.push(d);
        }
    }
    Ok(ImmersionGrid {
        model,
        window: *window,
        rho,
        theta,
        frames,
        drift,
    })
}

/// Same grid integrated `theta`-spine first; used to check path independence.
pub fn integrate_theta_first(gm: &GluedMetric, window: &GridWindow, opts: &ImmersionOptions) -> Result<ImmersionGrid> {
    window.validate()?;
    let model = AmbientModel::new(gm.eps());
    let li = LineIntegrator { gm, model, opts: *opts };
    let rho = window.rho_nodes();
    let theta = window.theta_nodes();
    let start = model.initial_frame();
    let d0 = NodeDiagnostics { pre_correction: 0.0, post_correction: start.gram_drift(&model) };
    let spine = li.along_theta(start, rho[0], &theta, d0)?;
    let columns: Vec<Vec<(FrameState, NodeDiagnostics)>> =
        spine.par_iter().map(|&(s, _)| li.along_rho(s, &rho)).collect::<Result<_>>()?;
    let mut frames = Vec::with_capacity(rho.len() * theta.len());
    let mut drift = Vec::with_capacity(rho.len() * theta.len());
    for i in 0..rho.len() {
        for col in &columns {
            frames.push(col[i].0);
            drift.push(col[i].1);
        }
    }
    Ok(ImmersionGrid {
        model,
        window: *window,
        rho,
        theta,
        frames,
        drift,
    })
}

/// Largest position and frame difference between the two integration orders.
#[derive(Debug, Clone, Serialize)]
pub struct PathIndependence {
    pub max_position_difference: f64,
    pub max_frame_difference: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub fn path_independence(gm: &GluedMetric, window: &GridWindow, opts: &ImmersionOptions) -> Result<PathIndependence> {
    let a = integrate_immersion(gm, window, opts)?;
    let b = integrate_theta_first(gm, window, opts)?;
    let mut pos: f64 = 0.0;
    let mut frame: f64 = 0.0;
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        let (ra, rb) = (fa.rows(), fb.rows());
        for r in 0..4 {
            for c in 0..4 {
                let d = (ra[r][c] - rb[r][c]).abs();
                if r == 0 {
                    pos = pos.max(d);
                }
                frame = frame.max(d);
            }
        }
    }
    Ok(PathIndependence {
        max_position_difference: pos,
        max_frame_difference: frame,
        threshold: 1e-5,
        passed: pos <= 1e-5,
    })
}
