//! The glued profile `F(rho)` on the whole real line and `Gamma = 1/F`.
//!
//! Copies of the base block are laid end to end by alternating translation and
//! reflection. For `eps = 1` this makes `F` periodic with period
//! `2 (rho_{0,1} - rho_{0,-1})`; for `eps` in `{-1, 0}` there is a single
//! reflection at `rho_{0,-1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::fd;
use crate::profile::{ExtendedReal, ProfileSolution, SpaceFormSign};

/// Reflection lattice `r -> rho_{0,r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GluingLattice {
    pub rho_minus: f64,
    pub rho_plus: ExtendedReal,
    /// `2 (rho_{0,1} - rho_{0,-1})`, present only when `rho_plus` is finite.
    pub period: Option<f64>,
}

impl GluingLattice {
    pub fn new(rho_minus: f64, rho_plus: ExtendedReal) -> Self {
        let period = rho_plus.finite().map(|p| 2.0 * (p - rho_minus));
        Self {
            rho_minus,
            rho_plus,
            period,
        }
    }

    /// `rho_{0,r}` for `r != 0`.
    pub fn lattice_point(&self, r: i64) -> Result<f64> {
        if r == 0 {
            return Err(Error::domain("rho_{0,0} is not a lattice point"));
        }
        let m = self.rho_minus;
        let Some(p) = self.rho_plus.finite() else {
            return if r == -1 {
                Ok(m)
            } else {
                Err(Error::domain(format!("only r = -1 is a junction when rho_{{0,1}} is infinite, got r = {r}")))
            };
        };
        let rf = r as f64;
        Ok(if r >= 1 {
            rf * p - (rf - 1.0) * m
        } else {
            (rf + 1.0) * p - rf * m
        })
    }

    /// `rho_r(xi)` given `rho0(xi)`: translation for even `r`, reflection for odd `r`.
    pub fn reflect(&self, rho0: f64, r: i64) -> Result<f64> {
        let m = self.rho_minus;
        let p = match self.rho_plus.finite() {
            Some(p) => p,
            None if r == 0 || r == -1 => 0.0,
            None => {
                return Err(Error::domain(format!(
                    "block r = {r} does not exist when rho_{{0,1}} is infinite"
                )))
            }
        };
        let rf = r as f64;
        Ok(if r.rem_euclid(2) == 0 {
            rf * (p - m) + rho0
        } else {
            (rf + 1.0) * p - (rf - 1.0) * m - rho0
        })
    }

    /// Root value of `F` at `rho_{0,r}`: `true` for the upper root.
    pub fn junction_is_upper(r: i64) -> bool {
        if r >= 1 {
            r % 2 == 0
        } else {
            r % 2 != 0
        }
    }
}

/// Position of `rho` relative to the blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduced {
    /// Block index `s`: block `s` carries `xi_s`.
    pub block: i64,
    /// Argument of `xi0` on the base block.
    pub base_rho: f64,
    /// `+1` on even blocks (`F` decreasing), `-1` on odd ones.
    pub orientation: f64,
    /// Exact root value when `rho` sits on a junction.
    pub junction: Option<f64>,
}

/// `F` and its first three derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FJet {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

/// `F: R -> [xi01, xi02]` assembled from the base-block inverse.
#[derive(Debug, Clone)]
pub struct GluedProfile {
    sol: ProfileSolution,
    lattice: GluingLattice,
}

/// `G(xi) = (1/6) d/dxi (xi^2 T)`, so that `F'' = G(F)` on every block.
pub(crate) fn g_of(eps: f64, c: f64, xi: f64) -> f64 {
    // xi^2 T = -xi^(14/3) + C xi^4 - 3 eps xi^2
    (-(14.0 / 3.0) * xi.powf(11.0 / 3.0) + 4.0 * c * xi.powi(3) - 6.0 * eps * xi) / 6.0
}

/// `G'(xi)`.
pub(crate) fn g_prime(eps: f64, c: f64, xi: f64) -> f64 {
    (-(154.0 / 9.0) * xi.powf(8.0 / 3.0) + 12.0 * c * xi * xi - 6.0 * eps) / 6.0
}

/// `G''(xi)`.
pub(crate) fn g_second(c: f64, xi: f64) -> f64 {
    (-(1232.0 / 27.0) * xi.powf(5.0 / 3.0) + 24.0 * c * xi) / 6.0
}

impl GluedProfile {
    pub fn new(sol: ProfileSolution) -> Self {
        let (m, p) = sol.rho0_limits();
        Self {
            lattice: GluingLattice::new(m, p),
            sol,
        }
    }

    pub fn solution(&self) -> &ProfileSolution {
        &self.sol
    }

    pub fn lattice(&self) -> &GluingLattice {
        &self.lattice
    }

    pub fn eps(&self) -> SpaceFormSign {
        self.sol.eps()
    }

    pub fn period(&self) -> Option<f64> {
        self.lattice.period
    }

    pub fn lattice_point(&self, r: i64) -> Result<f64> {
        self.lattice.lattice_point(r)
    }

    /// `rho_r(xi)`: where block `r` takes the value `xi`.
    pub fn reflect_rho_r(&self, xi: f64, r: i64) -> Result<f64> {
        let rho0 = self.sol.rho0(xi)?;
        self.lattice.reflect(rho0, r)
    }

    /// Maps `rho` to the base block.
    pub fn reduce(&self, rho: f64) -> Reduced {
        let m = self.lattice.rho_minus;
        let (xi01, xi02) = (self.sol.roots.xi01, self.sol.roots.xi02);
        match (self.lattice.rho_plus.finite(), self.lattice.period) {
            (Some(p), Some(period)) => {
                let k = ((rho - m) / period).floor();
                let mut red = (-k).mul_add(period, rho);
                red = red.clamp(m, m + period);
                let snap = 8.0 * f64::EPSILON * rho.abs().max(period).max(m.abs());
                let (block, base, orientation) = if red <= p {
                    (2 * k as i64, red, 1.0)
                } else {
                    (2 * k as i64 + 1, 2.0 * p - red, -1.0)
                };
                let junction = if (base - m).abs() <= snap {
                    Some(xi02)
                } else if (base - p).abs() <= snap {
                    Some(xi01)
                } else {
                    None
                };
                Reduced {
                    block,
                    base_rho: base.clamp(m, p),
                    orientation,
                    junction,
                }
            }
            _ => {
                let snap = 8.0 * f64::EPSILON * rho.abs().max(m.abs());
                let (block, base, orientation) = if rho >= m { (0, rho, 1.0) } else { (-1, 2.0 * m - rho, -1.0) };
                Reduced {
                    block,
                    base_rho: base.max(m),
                    orientation,
                    junction: ((base - m).abs() <= snap).then_some(xi02),
                }
            }
        }
    }

    /// `F(rho)`, total on the real line.
    pub fn eval_f(&self, rho: f64) -> f64 {
        let red = self.reduce(rho);
        if let Some(v) = red.junction {
            return v;
        }
        match self.sol.base_sample(red.base_rho) {
            Ok(s) => s.xi,
            // base_rho is always inside the closed base block by construction
            Err(_) => self.sol.roots.xi02,
        }
    }

    /// `F(rho)` through the polished inverse instead of the interpolant.
    pub fn eval_f_precise(&self, rho: f64) -> Result<f64> {
        let red = self.reduce(rho);
        if let Some(v) = red.junction {
            return Ok(v);
        }
        Ok(self.sol.base_sample_precise(red.base_rho)?.xi)
    }

    /// `Gamma(rho) = 1 / F(rho)`.
    pub fn eval_gamma(&self, rho: f64) -> f64 {
        1.0 / self.eval_f(rho)
    }

    /// Value and derivatives up to order three.
    pub fn jet(&self, rho: f64) -> FJet {
        let eps = self.sol.eps().value();
        let c = self.sol.c();
        let red = self.reduce(rho);
        let (f, f1) = match red.junction {
            Some(v) => (v, 0.0),
            None => match self.sol.base_sample(red.base_rho) {
                Ok(s) => (s.xi, red.orientation * s.xi * s.dlog),
                Err(_) => (self.sol.roots.xi02, 0.0),
            },
        };
        FJet {
            f,
            f1,
            f2: g_of(eps, c, f),
            f3: g_prime(eps, c, f) * f1,
        }
    }

    /// Polished counterpart of [`Self::jet`].
    pub fn jet_precise(&self, rho: f64) -> Result<FJet> {
        let eps = self.sol.eps().value();
        let c = self.sol.c();
        let red = self.reduce(rho);
        let (f, f1) = match red.junction {
            Some(v) => (v, 0.0),
            None => {
                let s = self.sol.base_sample_precise(red.base_rho)?;
                (s.xi, red.orientation * s.xi * s.dlog)
            }
        };
        Ok(FJet {
            f,
            f1,
            f2: g_of(eps, c, f),
            f3: g_prime(eps, c, f) * f1,
        })
    }

    /// `d^k F / d rho^k` for `k` in `1..=3`; junctions return the shared one-sided limit.
    pub fn derivative_f(&self, rho: f64, order: u8) -> Result<f64> {
        let j = self.jet(rho);
        match order {
            1 => Ok(j.f1),
            2 => Ok(j.f2),
            3 => Ok(j.f3),
            _ => Err(Error::domain(format!("derivative order must be 1, 2 or 3, got {order}"))),
        }
    }

    /// Analytic fourth derivative `G''(F) F'^2 + G'(F) F''`.
    pub fn fourth_derivative(&self, rho: f64) -> f64 {
        let j = self.jet(rho);
        let c = self.sol.c();
        g_second(c, j.f) * j.f1 * j.f1 + g_prime(self.sol.eps().value(), c, j.f) * j.f2
    }

    /// Lattice indices and positions of the junctions in `[a, b]`.
    pub fn junctions_in(&self, a: f64, b: f64) -> Vec<(i64, f64)> {
        let m = self.lattice.rho_minus;
        let Some(p) = self.lattice.rho_plus.finite() else {
            return if a <= m && m <= b { vec![(-1, m)] } else { Vec::new() };
        };
        let w = p - m;
        // rho_{0,r} ~ rho_{0,1} + (r - 1) w for r >= 1 and rho_{0,-1} + (r + 1) w for r <= -1.
        let lo = ((a - m) / w).floor() as i64 - 2;
        let hi = ((b - m) / w).ceil() as i64 + 2;
        let mut out = Vec::new();
        for r in lo..=hi {
            if r == 0 {
                continue;
            }
            if let Ok(x) = self.lattice.lattice_point(r) {
                if x >= a && x <= b {
                    out.push((r, x));
                }
            }
        }
        out
    }

    /// `(rho, F(rho))` on a uniform grid as CSV with 17 significant digits.
    pub fn csv_window(&self, a: f64, b: f64, n: usize) -> String {
        let mut out = String::from("rho,F\n");
        let n = n.max(2);
        for i in 0..n {
            let rho = a + (b - a) * i as f64 / (n - 1) as f64;
            out.push_str(&format!("{:.16e},{:.16e}\n", rho, self.eval_f(rho)));
        }
        out
    }

    /// Default audit window: three periods centred on the base block, or the single junction.
    pub fn default_window(&self) -> (f64, f64) {
        let m = self.lattice.rho_minus;
        match self.lattice.period {
            Some(period) => (m - 1.5 * period + 1e-9, m + 1.5 * period),
            None => (m - 1.0, m + 1.0),
        }
    }

    /// One-sided finite-difference audit of `F', F'', F''', F''''` at every junction in `[a, b]`.
    pub fn junction_smoothness_report(&self, a: f64, b: f64) -> Result<JunctionReport> {
        let scale = self.sol.block_width().unwrap_or(self.sol.width_ref());
        let eps = self.sol.eps().value();
        let c = self.sol.c();
        let mut entries = Vec::new();
        let mut max_mismatch = [0.0f64; 4];
        let mut max_analytic_gap = [0.0f64; 4];
        for (r, x) in self.junctions_in(a, b) {
            let root = self.eval_f(x);
            let analytic = [0.0, g_of(eps, c, root), 0.0, g_prime(eps, c, root) * g_of(eps, c, root)];
            let left = self.one_sided(x, -1.0, scale)?;
            let right = self.one_sided(x, 1.0, scale)?;
            let mut orders = Vec::with_capacity(4);
            for k in 0..4 {
                let mismatch = (left[k].0 - right[k].0).abs();
                let gap = (left[k].0 - analytic[k]).abs().max((right[k].0 - analytic[k]).abs());
                max_mismatch[k] = max_mismatch[k].max(mismatch);
                max_analytic_gap[k] = max_analytic_gap[k].max(gap);
                orders.push(OrderAudit {
                    order: k as u8 + 1,
                    left: left[k].0,
                    right: right[k].0,
                    analytic_limit: analytic[k],
                    mismatch,
                    step: left[k].1.max(right[k].1),
                });
            }
            entries.push(JunctionEntry {
                r,
                rho: x,
                value: root,
                orders,
            });
        }
        let passed = (0..3).all(|k| max_mismatch[k] <= JUNCTION_THRESHOLDS[k] && max_analytic_gap[k] <= JUNCTION_THRESHOLDS[k]);
        Ok(JunctionReport {
            window: (a, b),
            thresholds: JUNCTION_THRESHOLDS,
            max_mismatch,
            max_analytic_gap,
            junctions: entries,
            passed,
        })
    }

    /// Derivative estimates of orders 1..=4 from one side, choosing the step where
    /// successive refinements agree best. Returns `(value, step)` per order.
    fn one_sided(&self, x: f64, side: f64, scale: f64) -> Result<[(f64, f64); 4]> {
        const STEPS: [f64; 7] = [1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4];
        let mut est: Vec<[f64; 4]> = Vec::with_capacity(STEPS.len());
        for &s in &STEPS {
            let h = s * scale;
            let xs: Vec<f64> = (0..9).map(|k| side * k as f64 * h).collect();
            let ys = xs
                .iter()
                .map(|&d| self.eval_f_precise(x + d))
                .collect::<Result<Vec<f64>>>()?;
            let d = fd::apply(0.0, &xs, &ys, 4);
            est.push([d[1], d[2], d[3], d[4]]);
        }
        let mut out = [(0.0, 0.0); 4];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut best = (f64::INFINITY, 0usize);
            for i in 1..est.len() {
                let diff = (est[i][k] - est[i - 1][k]).abs();
                if diff < best.0 {
                    best = (diff, i);
                }
            }
            *slot = (est[best.1][k], STEPS[best.1] * scale);
        }
        Ok(out)
    }
}

/// Asserted mismatch thresholds for orders 1, 2, 3; order 4 is informational.
pub const JUNCTION_THRESHOLDS: [f64; 3] = [1e-7, 1e-6, 1e-4];

#[derive(Debug, Clone, Serialize)]
pub struct OrderAudit {
    pub order: u8,
    pub left: f64,
    pub right: f64,
    pub analytic_limit: f64,
    pub mismatch: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JunctionEntry {
    pub r: i64,
    pub rho: f64,
    pub value: f64,
    pub orders: Vec<OrderAudit>,
}

#[derive(Debug, Clone, Serialize)]
pub struct JunctionReport {
    pub window: (f64, f64),
    pub thresholds: [f64; 3],
    /// Left/right mismatch for orders 1..=4.
    pub max_mismatch: [f64; 4],
    /// Largest one-sided distance from the analytic limit for orders 1..=4.
    pub max_analytic_gap: [f64; 4],
    pub junctions: Vec<JunctionEntry>,
    pub passed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileParams;

    fn glued(eps: SpaceFormSign, c: f64) -> GluedProfile {
        GluedProfile::new(ProfileSolution::build(ProfileParams::new(eps, c)).unwrap())
    }

    #[test]
    fn lattice_examples() {
        let lat = GluingLattice::new(-1.0, ExtendedReal::Finite(2.0));
        assert_eq!(lat.lattice_point(2).unwrap(), 5.0);
        assert_eq!(lat.lattice_point(3).unwrap(), 8.0);
        assert_eq!(lat.lattice_point(-2).unwrap(), -4.0);
        assert!(lat.lattice_point(0).is_err());
        assert_eq!(lat.period, Some(6.0));
        assert_eq!(lat.reflect(0.5, 0).unwrap(), 0.5);
        assert_eq!(lat.reflect(0.5, 1).unwrap(), 3.5);
    }

    #[test]
    fn junction_values_follow_parity() {
        let g = glued(SpaceFormSign::Spherical, 3.0);
        let (lo, hi) = (g.solution().roots.xi01, g.solution().roots.xi02);
        for r in [-5, -4, -3, -2, -1, 1, 2, 3, 4, 5] {
            let x = g.lattice_point(r).unwrap();
            let want = if GluingLattice::junction_is_upper(r) { hi } else { lo };
            assert_eq!(g.eval_f(x), want, "r = {r}");
        }
    }

    #[test]
    fn periodic_and_reflection_symmetric() {
        let g = glued(SpaceFormSign::Spherical, 3.0);
        let p = g.period().unwrap();
        let rho1 = g.lattice_point(1).unwrap();
        let w = g.solution().block_width().unwrap();
        for k in 0..200 {
            let x = -7.0 + 0.0731 * k as f64;
            assert!((g.eval_f(x) - g.eval_f(x + p)).abs() < 1e-10);
            let t = w * (k as f64 / 200.0);
            assert!((g.eval_f(rho1 + t) - g.eval_f(rho1 - t)).abs() < 1e-10);
        }
    }

    #[test]
    fn first_derivative_matches_differences() {
        let g = glued(SpaceFormSign::Spherical, 3.0);
        let offsets: Vec<f64> = (-3..=3).map(|k| k as f64 * 1e-3).collect();
        for k in 0..50 {
            let x = -3.0 + 0.13 * k as f64;
            let ys: Vec<f64> = offsets.iter().map(|d| g.eval_f_precise(x + d).unwrap()).collect();
            let fd = fd::apply(0.0, &offsets, &ys, 1)[1];
            assert!((fd - g.derivative_f(x, 1).unwrap()).abs() < 1e-7, "{x}");
        }
        assert!(g.derivative_f(0.0, 4).is_err());
    }

    #[test]
    fn single_reflection_for_open_blocks() {
        for (eps, c) in [(SpaceFormSign::Hyperbolic, 0.0), (SpaceFormSign::Flat, 1.0)] {
            let g = glued(eps, c);
            let m = g.lattice().rho_minus;
            assert_eq!(g.eval_f(m), g.solution().roots.xi02);
            assert!(g.lattice_point(1).is_err());
            assert_eq!(g.junctions_in(m - 100.0, m + 100.0).len(), 1);
            for t in [0.1, 1.0, 5.0] {
                assert!((g.eval_f(m + t) - g.eval_f(m - t)).abs() < 1e-13);
                assert!(g.eval_f(m + t) > 0.0);
            }
        }
        let g = glued(SpaceFormSign::Hyperbolic, 0.0);
        assert!((g.eval_gamma(g.lattice().rho_minus) - 3f64.powf(-0.375)).abs() < 1e-15);
    }

    #[test]
    fn junction_audit_passes() {
        let g = glued(SpaceFormSign::Spherical, 3.0);
        let (a, b) = g.default_window();
        let rep = g.junction_smoothness_report(a, b).unwrap();
        assert!(rep.junctions.len() >= 5);
        assert!(rep.passed, "{:?} {:?}", rep.max_mismatch, rep.max_analytic_gap);
    }
}
