//! Piecewise quintic Hermite interpolation from values and two derivatives.

/// Sample of a C² function: abscissa, value, first and second derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteNode {
    pub x: f64,
    pub y: f64,
    pub dy: f64,
    pub d2y: f64,
}

/// C² piecewise quintic through a strictly increasing node sequence.
#[derive(Debug, Clone)]
pub struct QuinticHermite {
    xs: Vec<f64>,
    // Per interval: width and the six monomial coefficients in s = (x - x_i)/h.
    coeffs: Vec<(f64, [f64; 6])>,
}

impl QuinticHermite {
    /// Panics if fewer than two nodes are supplied or abscissae are not increasing.
    pub fn new(nodes: &[HermiteNode]) -> Self {
        assert!(nodes.len() >= 2, "need at least two nodes");
        let mut coeffs = Vec::with_capacity(nodes.len() - 1);
        for w in nodes.windows(2) {
            let (p, q) = (w[0], w[1]);
            let h = q.x - p.x;
            assert!(h > 0.0, "abscissae must be strictly increasing");
            let c0 = p.y;
            let c1 = h * p.dy;
            let c2 = 0.5 * h * h * p.d2y;
            let delta = q.y - c0 - c1 - c2;
            let d1 = h * q.dy - c1 - 2.0 * c2;
            let d2 = h * h * q.d2y - 2.0 * c2;
            let c3 = 10.0 * delta - 4.0 * d1 + 0.5 * d2;
            let c4 = -15.0 * delta + 7.0 * d1 - d2;
            let c5 = 6.0 * delta - 3.0 * d1 + 0.5 * d2;
            coeffs.push((h, [c0, c1, c2, c3, c4, c5]));
        }
        Self {
            xs: nodes.iter().map(|n| n.x).collect(),
            coeffs,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn interval(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&xi| xi <= x);
        i.saturating_sub(1).min(self.coeffs.len() - 1)
    }

    /// Value, first and second derivative at `x` (extrapolates the end pieces).
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let i = self.interval(x);
        let (h, c) = &self.coeffs[i];
        let s = (x - self.xs[i]) / h;
        let v = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
        let dv = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
        let d2v = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
        (v, dv / h, d2v / (h * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(x: f64) -> HermiteNode {
        HermiteNode {
            x,
            y: x.sin(),
            dy: x.cos(),
            d2y: -x.sin(),
        }
    }

    #[test]
    fn reproduces_quintics_exactly() {
        let p = |x: f64| (x.powi(5) - 2.0 * x.powi(3) + x, 5.0 * x.powi(4) - 6.0 * x * x + 1.0, 20.0 * x.powi(3) - 12.0 * x);
        let nodes: Vec<_> = [0.0, 0.7, 2.0]
            .iter()
            .map(|&x| {
                let (y, dy, d2y) = p(x);
                HermiteNode { x, y, dy, d2y }
            })
            .collect();
        let qh = QuinticHermite::new(&nodes);
        for x in [0.1, 0.5, 1.3, 1.99] {
            let (v, dv, d2v) = qh.eval(x);
            let (y, dy, d2y) = p(x);
            assert!((v - y).abs() < 1e-13 && (dv - dy).abs() < 1e-12 && (d2v - d2y).abs() < 1e-11);
        }
    }

    #[test]
    fn sixth_order_accuracy_on_sine() {
        let nodes: Vec<_> = (0..=100).map(|i| sample(i as f64 * 0.03)).collect();
        let qh = QuinticHermite::new(&nodes);
        let mut worst: f64 = 0.0;
        for k in 0..1000 {
            let x = k as f64 * 0.003;
            worst = worst.max((qh.eval(x).0 - x.sin()).abs());
        }
        assert!(worst < 1e-13, "{worst}");
    }
}
