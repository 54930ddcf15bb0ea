use biconservative::gluing::{GluedProfile, GluingLattice};
use biconservative::profile::{potential_t, ExtendedReal, ProfileParams, ProfileSolution, SpaceFormSign};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use std::sync::OnceLock;

fn glued(eps: SpaceFormSign, c: f64) -> GluedProfile {
    GluedProfile::new(ProfileSolution::build(ProfileParams::new(eps, c)).unwrap())
}

fn sphere() -> &'static GluedProfile {
    static G: OnceLock<GluedProfile> = OnceLock::new();
    G.get_or_init(|| glued(SpaceFormSign::Spherical, 3.0))
}

fn flat() -> &'static GluedProfile {
    static G: OnceLock<GluedProfile> = OnceLock::new();
    G.get_or_init(|| glued(SpaceFormSign::Flat, 1.0))
}

fn centred(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[test]
fn lattice_examples() {
    let lat = GluingLattice::new(-1.0, ExtendedReal::Finite(2.0));
    assert_eq!(lat.lattice_point(1).unwrap(), 2.0);
    assert_eq!(lat.lattice_point(-1).unwrap(), -1.0);
    assert_eq!(lat.lattice_point(2).unwrap(), 5.0);
    assert_eq!(lat.lattice_point(3).unwrap(), 8.0);
    assert_eq!(lat.lattice_point(-2).unwrap(), -4.0);
    assert!(lat.lattice_point(0).is_err());
    let pts: Vec<f64> = (-6..=6).filter(|&r| r != 0).map(|r| lat.lattice_point(r).unwrap()).collect();
    assert!(pts.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn parity_table_is_exact() {
    let g = sphere();
    let (x1, x2) = (g.solution().roots.xi01, g.solution().roots.xi02);
    for p in 1..=4i64 {
        assert_eq!(g.eval_f(g.lattice_point(2 * p).unwrap()), x2);
        assert_eq!(g.eval_f(g.lattice_point(2 * p - 1).unwrap()), x1);
        assert_eq!(g.eval_f(g.lattice_point(-2 * p + 1).unwrap()), x2);
        assert_eq!(g.eval_f(g.lattice_point(-2 * p).unwrap()), x1);
    }
    for (eps, c) in [(SpaceFormSign::Flat, 1.0), (SpaceFormSign::Hyperbolic, 0.0)] {
        let g = glued(eps, c);
        let m = g.lattice().rho_minus;
        assert_eq!(g.eval_f(m), g.solution().roots.xi02);
        assert_eq!(g.junctions_in(m - 50.0, m + 50.0), vec![(-1, m)]);
    }
}

#[test]
fn sphere_is_periodic_on_random_points() {
    let g = sphere();
    let period = g.period().unwrap();
    let (m, p) = (g.lattice().rho_minus, g.lattice().rho_plus.finite().unwrap());
    assert!((period - 2.0 * (p - m)).abs() < 1e-15 * period);
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..1000 {
        let rho = rng.gen_range(-20.0..20.0);
        let d = (g.eval_f(rho) - g.eval_f(rho + period)).abs();
        assert!(d <= 1e-10, "rho={rho} d={d}");
    }
}

#[test]
fn reflection_about_the_first_junction() {
    let g = sphere();
    let p = g.lattice_point(1).unwrap();
    let w = g.solution().block_width().unwrap();
    for k in 1..200 {
        let t = w * k as f64 / 200.0;
        assert!((g.eval_f(p + t) - g.eval_f(p - t)).abs() <= 1e-10, "t={t}");
    }
}

#[test]
fn gamma_bounds() {
    for (eps, c) in [(SpaceFormSign::Spherical, 3.0), (SpaceFormSign::Flat, 1.0), (SpaceFormSign::Hyperbolic, 0.0)] {
        let g = glued(eps, c);
        let (x1, x2) = (g.solution().roots.xi01, g.solution().roots.xi02);
        let m = g.lattice().rho_minus;
        for k in 0..=400 {
            let rho = m - 10.0 + 20.0 * k as f64 / 400.0;
            let f = g.eval_f(rho);
            assert!(f > 0.0 && f >= x1 && f <= x2, "eps={eps} rho={rho} F={f}");
            assert!(g.eval_gamma(rho) >= 1.0 / x2);
        }
    }
    let h = glued(SpaceFormSign::Hyperbolic, 0.0);
    let gamma = h.eval_gamma(h.lattice().rho_minus);
    assert!((gamma - 3f64.powf(-3.0 / 8.0)).abs() < 1e-12);
    assert!((gamma - 0.66233).abs() < 1e-5);
}

#[test]
fn derivative_matches_potential_and_flips_on_odd_blocks() {
    let g = sphere();
    let params = ProfileParams::new(SpaceFormSign::Spherical, 3.0);
    let (m, p) = (g.lattice().rho_minus, g.lattice_point(1).unwrap());
    let f = |x: f64| g.eval_f_precise(x).unwrap();
    for k in 1..20 {
        let rho = m + (p - m) * k as f64 / 20.0;
        let fv = g.eval_f(rho);
        let expected = -fv * (potential_t(fv, &params).unwrap() / 3.0).sqrt();
        let d1 = g.derivative_f(rho, 1).unwrap();
        assert!((d1 - expected).abs() <= 1e-9 * expected.abs().max(1.0), "rho={rho}");
        assert!((centred(&f, rho, 1e-3) - expected).abs() <= 1e-7, "rho={rho}");
        // the mirrored point on the next block
        assert!((g.derivative_f(2.0 * p - rho, 1).unwrap() + d1).abs() <= 1e-9);
    }
    for (_, rho) in g.junctions_in(m - 1.0, m + 2.0 * g.period().unwrap()) {
        assert_eq!(g.derivative_f(rho, 1).unwrap(), 0.0);
        // second-order one-sided differences from both sides
        let h = 1e-4;
        let right = (-3.0 * f(rho) + 4.0 * f(rho + h) - f(rho + 2.0 * h)) / (2.0 * h);
        let left = (3.0 * f(rho) - 4.0 * f(rho - h) + f(rho - 2.0 * h)) / (2.0 * h);
        assert!(right.abs() <= 1e-6 && left.abs() <= 1e-6, "rho={rho} {left} {right}");
    }
    assert!(g.derivative_f(0.3, 4).is_err());
}

#[test]
fn junction_audit_meets_thresholds() {
    for (eps, c) in [(SpaceFormSign::Spherical, 3.0), (SpaceFormSign::Flat, 1.0), (SpaceFormSign::Hyperbolic, 0.0)] {
        let g = glued(eps, c);
        let (a, b) = g.default_window();
        let rep = g.junction_smoothness_report(a, b).unwrap();
        assert!(!rep.junctions.is_empty());
        for k in 0..3 {
            assert!(rep.max_mismatch[k] <= rep.thresholds[k], "eps={eps} order {}: {}", k + 1, rep.max_mismatch[k]);
        }
        assert!(rep.passed);
    }
}

#[test]
fn arcs_are_monotone_between_alternating_junctions() {
    let g = sphere();
    let (x1, x2) = (g.solution().roots.xi01, g.solution().roots.xi02);
    let (a, b) = g.default_window();
    let js = g.junctions_in(a, b);
    assert!(js.len() >= 5);
    for w in js.windows(2) {
        let (fa, fb) = (g.eval_f(w[0].1), g.eval_f(w[1].1));
        assert!((fa == x1 && fb == x2) || (fa == x2 && fb == x1));
        let up = fb > fa;
        let mut prev = fa;
        for k in 1..=100 {
            let v = g.eval_f(w[0].1 + (w[1].1 - w[0].1) * k as f64 / 100.0);
            assert!(if up { v >= prev } else { v <= prev });
            prev = v;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reduction_lands_in_the_base_block(rho in -1e4f64..1e4) {
        let g = sphere();
        let red = g.reduce(rho);
        let (m, p) = (g.lattice().rho_minus, g.lattice().rho_plus.finite().unwrap());
        prop_assert!(red.base_rho >= m - 1e-12 && red.base_rho <= p + 1e-12);
        let f = g.eval_f(rho);
        prop_assert!(f >= g.solution().roots.xi01 && f <= g.solution().roots.xi02);
    }

    #[test]
    fn period_shift_is_invisible(rho in -200.0f64..200.0, k in -5i64..5) {
        let g = sphere();
        let shifted = rho + k as f64 * g.period().unwrap();
        prop_assert!((g.eval_f(rho) - g.eval_f(shifted)).abs() <= 1e-10);
    }

    #[test]
    fn single_reflection_is_symmetric(t in 0.0f64..30.0) {
        let g = flat();
        let m = g.lattice().rho_minus;
        prop_assert!((g.eval_f(m + t) - g.eval_f(m - t)).abs() <= 1e-10);
    }

    #[test]
    fn reflected_preimage_round_trips(frac in 0.02f64..0.98, r in -4i64..5) {
        let g = sphere();
        let (x1, x2) = (g.solution().roots.xi01, g.solution().roots.xi02);
        let xi = x1 + frac * (x2 - x1);
        let rho = g.reflect_rho_r(xi, r).unwrap();
        prop_assert!((g.eval_f_precise(rho).unwrap() - xi).abs() <= 1e-9);
    }
}
