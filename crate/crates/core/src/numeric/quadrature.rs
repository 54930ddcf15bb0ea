//! One-dimensional quadrature.
//!
//! Two independent node families are provided: adaptive Gauss-Kronrod 7/15
//! for smooth integrands, and double-exponential (tanh-sinh) quadrature which
//! tolerates integrable endpoint singularities without any change of variable.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Single Gauss-Kronrod 15-point panel. Returns `(integral, error_estimate)`.
pub fn gauss_kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *slot = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_panels: 2000,
        }
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Panels are bisected in order of decreasing error estimate until the
/// summed estimate drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (r0, e0) = gauss_kronrod15(&mut f, a, b);
    let mut panels = vec![(a, b, r0, e0)];
    let mut total = r0;
    let mut err = e0;
    loop {
        if !total.is_finite() {
            return Err(Error::numerical(format!("non-finite integrand on [{a}, {b}]")));
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target {
            return Ok(total);
        }
        if panels.len() >= opts.max_panels {
            // Round-off floor: accept if the remaining error is at rounding level.
            if err <= 1e3 * f64::EPSILON * total.abs().max(1.0) {
                return Ok(total);
            }
            return Err(Error::numerical(format!(
                "quadrature on [{a}, {b}] stalled at error {err:e} (target {target:e})"
            )));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (pa, pb, pr, pe) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa.min(pb) || mid >= pa.max(pb) {
            return Ok(total);
        }
        let (r1, e1) = gauss_kronrod15(&mut f, pa, mid);
        let (r2, e2) = gauss_kronrod15(&mut f, mid, pb);
        total += r1 + r2 - pr;
        err += e1 + e2 - pe;
        panels.push((pa, mid, r1, e1));
        panels.push((mid, pb, r2, e2));
        // Re-sum occasionally to keep the running totals free of drift.
        if panels.len() % 64 == 0 {
            total = panels.iter().map(|p| p.2).sum();
            err = panels.iter().map(|p| p.3).sum();
        }
    }
}

/// Tanh-sinh quadrature over `[a, b]`.
///
/// The integrand receives `(x, x - a, b - x)`; the endpoint distances are
/// computed without cancellation so integrands with `1/sqrt` endpoint
/// behaviour can be evaluated accurately arbitrarily close to the ends.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    use std::f64::consts::FRAC_PI_2;
    if a == b {
        return Ok(0.0);
    }
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    // Sum of w_j * f(x_j) over abscissae t = j*h, split so each level only adds odd j.
    let mut eval = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cs = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cs * cs);
        // 1 - tanh(|s|) = 2 / (1 + e^{2|s|})
        let comp = 2.0 / (1.0 + (2.0 * s.abs()).exp());
        let x_unit = s.tanh();
        let (dl, dr) = if s >= 0.0 {
            (half * (2.0 - comp), half * comp)
        } else {
            (half * comp, half * (2.0 - comp))
        };
        if dl <= 0.0 || dr <= 0.0 || w == 0.0 {
            return 0.0;
        }
        w * f(center + half * x_unit, dl, dr)
    };
    let t_max = 6.5;
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut j = 1;
    while (j as f64) * h <= t_max {
        let t = j as f64 * h;
        sum += eval(t) + eval(-t);
        j += 1;
    }
    let mut prev = sum * h * half;
    for _level in 0..14 {
        h *= 0.5;
        let mut j = 1;
        while (j as f64) * h <= t_max {
            let t = j as f64 * h;
            sum += eval(t) + eval(-t);
            j += 2;
        }
        let est = sum * h * half;
        if !est.is_finite() {
            return Err(Error::numerical("tanh-sinh: non-finite integrand"));
        }
        if (est - prev).abs() <= tol.max(4.0 * f64::EPSILON * est.abs()) {
            return Ok(est);
        }
        prev = est;
    }
    Err(Error::numerical("tanh-sinh did not converge"))
}
