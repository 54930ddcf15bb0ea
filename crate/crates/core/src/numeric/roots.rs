//! Bracketed root refinement.

use crate::error::{Error, Result};

/// Newton iteration safeguarded by bisection on a sign-changing bracket.
///
/// `f` returns `(value, derivative)`. Stops when the step falls below
/// `rel_tol * |x|` (or `rel_tol` near zero) or the value vanishes exactly.
pub fn safeguarded_newton<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numerical(format!(
            "no sign change on [{a}, {b}]: f(a)={fa:e}, f(b)={fb:e}"
        )));
    }
    // Orient so that f(a) < 0 < f(b).
    let flip = fa > 0.0;
    let mut x = 0.5 * (a + b);
    let mut last_step = b - a;
    for _ in 0..200 {
        let (mut fx, mut dfx) = f(x);
        if flip {
            fx = -fx;
            dfx = -dfx;
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let step;
        if dfx != 0.0 && newton > a && newton < b && (fx / dfx).abs() < 0.5 * last_step.abs() {
            step = newton - x;
            x = newton;
        } else {
            let mid = 0.5 * (a + b);
            step = mid - x;
            x = mid;
        }
        last_step = step;
        let scale = x.abs().max(f64::MIN_POSITIVE);
        if step.abs() <= rel_tol * scale || b - a <= rel_tol * scale {
            return Ok(x);
        }
    }
    Err(Error::numerical("safeguarded Newton did not converge in 200 iterations"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_of_two() {
        let r = safeguarded_newton(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn flat_derivative_falls_back_to_bisection() {
        // triple root: Newton only converges linearly there
        let r = safeguarded_newton(|x| ((x - 0.1).powi(3), 3.0 * (x - 0.1).powi(2)), -1.0, 0.5, 1e-14)
            .unwrap();
        assert!((r - 0.1).abs() < 1e-12);
    }

    #[test]
    fn missing_bracket_is_reported() {
        assert!(safeguarded_newton(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12).is_err());
    }
}
