//! Residual reports shared by the intrinsic and extrinsic verifiers.

use serde::{Deserialize, Serialize};

/// Sampling grid in `rho` (and optionally `theta`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_rho: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<(f64, f64, usize)>,
    /// Points dropped because they fell inside a junction guard band.
    pub excluded: usize,
}

/// Outcome of checking one identity over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: String,
    pub grid_spec: GridSpec,
    pub max_residual: f64,
    pub rms_residual: f64,
    /// Half-width of the excluded band around each junction.
    pub guard_band: f64,
    pub sign_convention: String,
    pub threshold: f64,
    pub passed: bool,
}

impl ResidualReport {
    /// Builds a report from per-point residuals; non-finite residuals fail the check.
    pub fn from_residuals(
        identity: &str,
        grid_spec: GridSpec,
        residuals: &[f64],
        guard_band: f64,
        sign_convention: &str,
        threshold: f64,
    ) -> Self {
        let mut max: f64 = 0.0;
        let mut sum_sq = 0.0;
        let mut finite = true;
        for r in residuals {
            if !r.is_finite() {
                finite = false;
                continue;
            }
            max = max.max(r.abs());
            sum_sq += r * r;
        }
        let rms = if residuals.is_empty() { 0.0 } else { (sum_sq / residuals.len() as f64).sqrt() };
        if !finite {
            max = f64::INFINITY;
        }
        Self {
            identity: identity.to_string(),
            grid_spec,
            max_residual: max,
            rms_residual: rms,
            guard_band,
            sign_convention: sign_convention.to_string(),
            threshold,
            passed: finite && !residuals.is_empty() && max <= threshold,
        }
    }

    /// One-line summary used by the command-line tool.
    pub fn summary(&self) -> String {
        format!(
            "{:<28} {} max={:.3e} rms={:.3e} tol={:.1e}",
            self.identity,
            if self.passed { "PASS" } else { "FAIL" },
            self.max_residual,
            self.rms_residual,
            self.threshold
        )
    }
}
