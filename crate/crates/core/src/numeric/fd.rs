//! Finite-difference weights on arbitrary stencils (Fornberg's recursion).

/// Weights `w[k][j]` such that `f^(k)(x0) ~ sum_j w[k][j] f(xs[j])` for `k <= m`.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut w = vec![vec![0.0; n]; m + 1];
    w[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

/// Derivatives of orders `0..=m` at `x0` from samples `ys` at `xs`.
pub fn apply(x0: f64, xs: &[f64], ys: &[f64], m: usize) -> Vec<f64> {
    fornberg_weights(x0, xs, m)
        .iter()
        .map(|row| row.iter().zip(ys).map(|(w, y)| w * y).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_second_difference() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
    }

    #[test]
    fn one_sided_derivatives_of_exp() {
        let h = 1e-2;
        let xs: Vec<f64> = (0..7).map(|k| k as f64 * h).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.exp()).collect();
        let d = apply(0.0, &xs, &ys, 3);
        for v in &d {
            assert!((v - 1.0).abs() < 1e-6, "{d:?}");
        }
    }
}
