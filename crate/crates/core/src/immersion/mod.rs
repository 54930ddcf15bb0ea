//! Extrinsic realization of the glued surface in the space form `N^3(eps)`.
//!
//! Ambient models: `R^3` (stored in coordinates 1..=3 of a 4-vector) for
//! `eps = 0`, the unit sphere of Euclidean `R^4` for `eps = 1`, and the upper
//! sheet of `<x, x> = -1` in Minkowski `R^{1,3}` for `eps = -1`.
//!
//! The moving frame is `(Phi, E1, E2, N)` with `E1 = dPhi(X1)`, `E2 = dPhi(X2)`
//! and `N` the unit normal oriented so that `trace A = f > 0`. In that frame the
//! shape operator is `diag(lambda1, lambda2)`.

mod export;
mod extrinsic;
mod integrate;
mod oracle;

pub use export::{export_mesh, read_csv_points, CsvPoint, MeshFormat, MeshOptions, MeshSummary, Projection};
pub use extrinsic::{extrinsic_checks, ExtrinsicReport};
pub use integrate::{
    integrate_immersion, integrate_theta_first, path_independence, GridWindow, ImmersionGrid, ImmersionOptions,
    NodeDiagnostics, PathIndependence,
};
pub use oracle::{compare_to_oracle, explicit_immersion_eps0, flat_oracle_coordinates, FlatOracleMap, OracleReport};

use serde::{Deserialize, Serialize};

use crate::geometry::{GluedMetric, LAPLACIAN_CONVENTION};
use crate::profile::SpaceFormSign;
use crate::report::ResidualReport;
use crate::error::Result;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

pub type Vec4 = [f64; 4];

/// Ambient space form model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbientModel {
    pub eps: SpaceFormSign,
}

impl AmbientModel {
    pub fn new(eps: SpaceFormSign) -> Self {
        Self { eps }
    }

    /// Dimension of the linear space the model lives in.
    pub fn embedding_dim(&self) -> usize {
        match self.eps {
            SpaceFormSign::Flat => 3,
            _ => 4,
        }
    }

    /// Diagonal of the inner product on the 4-vector representation.
    pub fn signature(&self) -> Vec4 {
        match self.eps {
            SpaceFormSign::Hyperbolic => [-1.0, 1.0, 1.0, 1.0],
            _ => [1.0, 1.0, 1.0, 1.0],
        }
    }

    pub fn inner(&self, a: &Vec4, b: &Vec4) -> f64 {
        let s = self.signature();
        (0..4).map(|i| s[i] * a[i] * b[i]).sum()
    }

    /// Required value of `<Phi, Phi>`, `None` for the flat model.
    pub fn constraint(&self) -> Option<f64> {
        match self.eps {
            SpaceFormSign::Flat => None,
            e => Some(e.value()),
        }
    }

    /// Target Gram matrix diagonal of `(Phi, E1, E2, N)`.
    pub fn gram_target(&self) -> Vec4 {
        [self.eps.value(), 1.0, 1.0, 1.0]
    }

    /// Canonical frame at the base point.
    pub fn initial_frame(&self) -> FrameState {
        let e = |i: usize| {
            let mut v = [0.0; 4];
            v[i] = 1.0;
            v
        };
        FrameState {
            phi: if self.eps == SpaceFormSign::Flat { [0.0; 4] } else { e(0) },
            e1: e(1),
            e2: e(2),
            n: e(3),
        }
    }

    /// Ambient coordinates of a point in the model's own dimension.
    pub fn coordinates(&self, p: &Vec4) -> Vec<f64> {
        match self.eps {
            SpaceFormSign::Flat => p[1..].to_vec(),
            _ => p.to_vec(),
        }
    }
}

/// Position and adapted frame at one point of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameState {
    pub phi: Vec4,
    pub e1: Vec4,
    pub e2: Vec4,
    pub n: Vec4,
}

impl FrameState {
    pub fn rows(&self) -> [Vec4; 4] {
        [self.phi, self.e1, self.e2, self.n]
    }

    pub fn from_rows(r: &[Vec4; 4]) -> Self {
        Self {
            phi: r[0],
            e1: r[1],
            e2: r[2],
            n: r[3],
        }
    }

    pub(crate) fn to_flat(self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for (i, row) in self.rows().iter().enumerate() {
            out[4 * i..4 * i + 4].copy_from_slice(row);
        }
        out
    }

    pub(crate) fn from_flat(y: &[f64; 16]) -> Self {
        let row = |i: usize| [y[4 * i], y[4 * i + 1], y[4 * i + 2], y[4 * i + 3]];
        Self {
            phi: row(0),
            e1: row(1),
            e2: row(2),
            n: row(3),
        }
    }

    /// Largest entry of `Gram - target`; the `Phi` row is skipped for the flat model.
    ///
    /// Entry `(i, j)` is divided by `max(1, |X_i| |X_j|)` in the Euclidean norm of
    /// the coordinates, which only matters on the hyperboloid where the frame
    /// vectors grow while their Lorentz products stay of order one.
    pub fn gram_drift(&self, model: &AmbientModel) -> f64 {
        let rows = self.rows();
        let norm = |v: &Vec4| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let target = model.gram_target();
        let start = if model.eps == SpaceFormSign::Flat { 1 } else { 0 };
        let mut worst: f64 = 0.0;
        for i in start..4 {
            for j in i..4 {
                let want = if i == j { target[i] } else { 0.0 };
                let scale = (norm(&rows[i]) * norm(&rows[j])).max(1.0);
                worst = worst.max((model.inner(&rows[i], &rows[j]) - want).abs() / scale);
            }
        }
        worst
    }
}

/// Tangent direction of a frame ODE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rho,
    Theta,
}

/// Principal curvatures in the `(X1, X2)` frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShapeOperatorSample {
    pub rho: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `trace A`, the mean curvature function.
    pub f: f64,
}

impl ShapeOperatorSample {
    pub fn det(&self) -> f64 {
        self.lambda1 * self.lambda2
    }
}

/// `A = diag(-sqrt(eps-K)/sqrt3, sqrt(3(eps-K)))`.
pub fn shape_operator(rho: f64, gm: &GluedMetric) -> ShapeOperatorSample {
    let d = (gm.eps().value() - gm.gauss_curvature(rho)).max(0.0);
    ShapeOperatorSample {
        rho,
        lambda1: -d.sqrt() / SQRT_3,
        lambda2: (3.0 * d).sqrt(),
        f: 2.0 / SQRT_3 * d.sqrt(),
    }
}

/// Coefficients of the frame ODE at one `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FrameCoefficients {
    pub eps: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gamma: f64,
    /// `Gamma * omega_tilde = Gamma'`
    pub dgamma: f64,
}

impl FrameCoefficients {
    pub fn at(gm: &GluedMetric, rho: f64) -> Self {
        let j = gm.profile().jet(rho);
        let p = j.f.powf(4.0 / 3.0);
        Self {
            eps: gm.eps().value(),
            lambda1: -p / (3.0 * SQRT_3),
            lambda2: p / SQRT_3,
            gamma: 1.0 / j.f,
            dgamma: -j.f1 / (j.f * j.f),
        }
    }

    /// Coefficient matrix `M` with `dX/ds = M X` for rows `X = (Phi, E1, E2, N)`.
    pub fn matrix(&self, dir: Direction) -> [[f64; 4]; 4] {
        let e = self.eps;
        match dir {
            Direction::Rho => {
                let l = self.lambda1;
                [[0.0, 1.0, 0.0, 0.0], [-e, 0.0, 0.0, l], [0.0; 4], [0.0, -l, 0.0, 0.0]]
            }
            Direction::Theta => {
                let (g, dg, l) = (self.gamma, self.dgamma, self.lambda2);
                [
                    [0.0, 0.0, g, 0.0],
                    [0.0, 0.0, dg, 0.0],
                    [-e * g, -dg, 0.0, g * l],
                    [0.0, 0.0, -g * l, 0.0],
                ]
            }
        }
    }
}

pub(crate) fn apply_matrix(m: &[[f64; 4]; 4], y: &[f64; 16]) -> [f64; 16] {
    let mut out = [0.0; 16];
    for i in 0..4 {
        for (k, &mik) in m[i].iter().enumerate() {
            if mik != 0.0 {
                for c in 0..4 {
                    out[4 * i + c] += mik * y[4 * k + c];
                }
            }
        }
    }
    out
}

/// Derivative of the frame along `d/drho` or `d/dtheta` at parameter `rho`.
pub fn frame_ode_rhs(state: &FrameState, dir: Direction, rho: f64, gm: &GluedMetric) -> FrameState {
    let m = FrameCoefficients::at(gm, rho).matrix(dir);
    FrameState::from_flat(&apply_matrix(&m, &state.to_flat()))
}

fn sweep_report<F>(gm: &GluedMetric, name: &str, a: f64, b: f64, n: usize, threshold: f64, f: F) -> Result<ResidualReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    use rayon::prelude::*;
    let (pts, spec) = gm.grid(a, b, n);
    let res = pts.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    Ok(ResidualReport::from_residuals(name, spec, &res, gm.guard_band(), LAPLACIAN_CONVENTION, threshold))
}

/// `|A(grad f) + (f/2) grad f| / max(1, |grad f|)`; `grad f = f' X1`.
pub fn verify_biconservative_tangency(gm: &GluedMetric, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
    sweep_report(gm, "biconservative_tangency", a, b, n, 1e-10, |x| {
        let s = gm.curvature_precise(x)?;
        let so = shape_operator(x, gm);
        // f^2 = (4/3)(eps - K)  =>  f f' = -(2/3) K'
        let df = -(2.0 / 3.0) * s.dk_drho / so.f;
        Ok((so.lambda1 * df + 0.5 * so.f * df).abs() / df.abs().max(1.0))
    })
}

/// Codazzi in scalar form `X1(lambda2) = omega_tilde (lambda1 - lambda2)`.
///
/// The left side uses `lambda2' = -3 K' / (2 lambda2)`, the right side takes
/// `omega_tilde = Gamma'/Gamma` from the warping function.
pub fn verify_codazzi(gm: &GluedMetric, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
    sweep_report(gm, "codazzi", a, b, n, 1e-7, |x| {
        let j = gm.profile().jet_precise(x)?;
        let s = gm.curvature_precise(x)?;
        let so = shape_operator(x, gm);
        let lhs = -3.0 * s.dk_drho / (2.0 * so.lambda2);
        let omega_tilde = -j.f1 / j.f;
        let rhs = omega_tilde * (so.lambda1 - so.lambda2);
        Ok((lhs - rhs).abs() / lhs.abs().max(1.0))
    })
}

/// `lambda2 - lambda1 > 0` and the closed-form identities for trace, determinant and gap.
pub fn verify_shape_identities(gm: &GluedMetric, a: f64, b: f64, n: usize) -> Result<ResidualReport> {
    let eps = gm.eps().value();
    sweep_report(gm, "shape_operator_identities", a, b, n, 1e-12, |x| {
        let so = shape_operator(x, gm);
        let k = gm.gauss_curvature(x);
        let d = eps - k;
        let scale = d.max(1.0);
        let r = [
            (so.det() - (k - eps)) / scale,
            (so.lambda1 + so.lambda2 - so.f) / scale.sqrt(),
            (so.lambda2 - so.lambda1 - 4.0 / SQRT_3 * d.sqrt()) / scale.sqrt(),
            (so.lambda1 + 0.5 * so.f) / scale.sqrt(),
            (so.lambda2 - 1.5 * so.f) / scale.sqrt(),
        ];
        let worst = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(if so.lambda2 > so.lambda1 { worst } else { f64::INFINITY })
    })
}

/// Mean-curvature values on the two junction types.
#[derive(Debug, Clone, Serialize)]
pub struct JunctionMeanCurvature {
    /// `(xi, f^2 = (4/27) xi^(8/3))` at the lower and upper roots.
    pub values: Vec<(f64, f64)>,
    /// Smallest distance of `f^2` to the forbidden values `0` and `4/3`.
    pub min_gap: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// `f^2` at both roots must avoid `0` and `4/3` (only meaningful for `eps = 1`).
pub fn junction_mean_curvature(gm: &GluedMetric) -> JunctionMeanCurvature {
    let roots = gm.profile().solution().roots;
    let values: Vec<(f64, f64)> = [roots.xi01, roots.xi02]
        .iter()
        .map(|&x| (x, 4.0 / 27.0 * x.powf(8.0 / 3.0)))
        .collect();
    let min_gap = values
        .iter()
        .map(|&(_, f2)| f2.abs().min((f2 - 4.0 / 3.0).abs()))
        .fold(f64::INFINITY, f64::min);
    JunctionMeanCurvature {
        values,
        min_gap,
        threshold: 1e-6,
        passed: min_gap > 1e-6,
    }
}
