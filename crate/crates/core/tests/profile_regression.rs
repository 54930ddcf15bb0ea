use biconservative::error::Error;
use biconservative::profile::{find_roots, potential_t, ProfileParams, ProfileSolution, RootSide, SpaceFormSign};

fn t_oracle(eps: f64, c: f64, x: f64) -> f64 {
    -(x.ln() * 8.0 / 3.0).exp() + c * x * x - 3.0 * eps
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson on the raw integrand; only used away from the roots.
fn rho0_oracle(eps: f64, c: f64, xi00: f64, xi: f64) -> f64 {
    let f = move |t: f64| (3.0 / (t * t * t_oracle(eps, c, t))).sqrt();
    let (a, b) = (xi00.min(xi), xi00.max(xi));
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = simpson(&f, a, b, fa, fm, fb, whole, 1e-14, 40);
    if xi > xi00 {
        -v
    } else {
        v
    }
}

fn sphere_midpoint() -> ProfileSolution {
    let roots = find_roots(&ProfileParams::new(SpaceFormSign::Spherical, 3.0)).unwrap();
    let mid = 0.5 * (roots.xi01 + roots.xi02);
    ProfileSolution::build(ProfileParams::new(SpaceFormSign::Spherical, 3.0).with_base_point(mid)).unwrap()
}

#[test]
fn potential_examples() {
    let p = |eps, c| ProfileParams::new(eps, c);
    assert_eq!(potential_t(0.0, &p(SpaceFormSign::Hyperbolic, 7.0)).unwrap(), 3.0);
    assert!(potential_t(8.0, &p(SpaceFormSign::Flat, 4.0)).unwrap().abs() < 1e-12);
    let expected = -(2f64.ln() * 8.0 / 3.0).exp() + 12.0 - 3.0;
    assert!((potential_t(2.0, &p(SpaceFormSign::Spherical, 3.0)).unwrap() - expected).abs() < 1e-14);
    assert!((expected - 2.6504).abs() < 1e-4);
    assert!(matches!(potential_t(-1.0, &p(SpaceFormSign::Flat, 1.0)), Err(Error::Domain(_))));
}

#[test]
fn potential_vanishes_at_roots() {
    for (eps, c) in [(SpaceFormSign::Spherical, 3.0), (SpaceFormSign::Spherical, 10.0), (SpaceFormSign::Flat, 9.0), (SpaceFormSign::Hyperbolic, -2.0), (SpaceFormSign::Hyperbolic, 5.0)] {
        let params = ProfileParams::new(eps, c);
        let r = find_roots(&params).unwrap();
        let mut roots = vec![r.xi02];
        if eps == SpaceFormSign::Spherical {
            roots.push(r.xi01);
        } else {
            assert_eq!(r.xi01, 0.0);
        }
        for x in roots {
            let t = potential_t(x, &params).unwrap();
            assert!(t.abs() <= 1e-11 * (c.abs() * x * x).max(1.0), "eps={eps} C={c} T({x})={t}");
        }
    }
}

#[test]
fn sphere_roots_match_bisection() {
    let bisect = |mut a: f64, mut b: f64| {
        let f = |x| t_oracle(1.0, 3.0, x);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(a) > 0.0) == (f(m) > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let r = find_roots(&ProfileParams::new(SpaceFormSign::Spherical, 3.0)).unwrap();
    assert!((r.xi01 - bisect(0.0, 3.375)).abs() < 1e-13 * r.xi01);
    assert!((r.xi02 - bisect(3.375, 6.0)).abs() < 1e-13 * r.xi02);
    assert!((r.xi01 - 1.284_454_528_326_454).abs() < 1e-12);
    assert!((r.xi02 - 4.871_158_179_284_799).abs() < 1e-12);
}

/// `rho0` at five interior probe points with the base point at the arithmetic midpoint of the roots.
const PROBES: [(f64, f64); 5] = [
    (0.1, 6.185_135_535_758_595e-1),
    (0.3, 2.130_967_131_089_098e-1),
    (0.5, 0.0),
    (0.7, -1.554_539_705_805_328e-1),
    (0.9, -3.058_225_581_704_866e-1),
];

#[test]
fn rho0_probe_table() {
    let sol = sphere_midpoint();
    let r = sol.roots;
    for (frac, frozen) in PROBES {
        let xi = r.xi01 + frac * (r.xi02 - r.xi01);
        let oracle = rho0_oracle(1.0, 3.0, sol.xi00, xi);
        let got = sol.rho0(xi).unwrap();
        assert!((got - oracle).abs() <= 1e-10, "xi={xi}: {got} vs {oracle}");
        assert!((got - frozen).abs() <= 1e-10);
    }
    assert!(sol.rho0(sol.xi00).unwrap().abs() < 1e-14);
}

#[test]
fn rho_minus_matches_richardson_extrapolation() {
    for sol in [sphere_midpoint(), ProfileSolution::build(ProfileParams::new(SpaceFormSign::Hyperbolic, 0.0)).unwrap()] {
        let x2 = sol.roots.xi02;
        // rho0(x2 - s^2) = rho_minus + a1 s + a3 s^3 + ...
        let s0: f64 = 1e-2;
        let g = |s: f64| sol.rho0(x2 - s * s).unwrap();
        let (r1, r2, r3) = (g(s0), g(s0 / 2.0), g(s0 / 4.0));
        let e1 = 2.0 * r2 - r1;
        let e2 = 2.0 * r3 - r2;
        let extrap = (8.0 * e2 - e1) / 7.0;
        assert!((extrap - sol.rho_minus).abs() <= 1e-8, "{extrap} vs {}", sol.rho_minus);
    }
}

#[test]
fn limits_have_the_right_shape() {
    let s = sphere_midpoint();
    let (lo, hi) = s.rho0_limits();
    assert!(lo < 0.0 && hi.finite().unwrap() > 0.0);
    for (eps, c) in [(SpaceFormSign::Hyperbolic, 0.0), (SpaceFormSign::Flat, 1.0)] {
        let sol = ProfileSolution::build(ProfileParams::new(eps, c)).unwrap();
        assert!(sol.rho0_limits().1.is_infinite());
        assert!(sol.rho_minus < 0.0);
    }
}

#[test]
fn round_trip_on_a_thousand_points() {
    for (eps, c) in [(SpaceFormSign::Spherical, 3.0), (SpaceFormSign::Flat, 1.0), (SpaceFormSign::Hyperbolic, 0.0)] {
        let sol = ProfileSolution::build(ProfileParams::new(eps, c)).unwrap();
        let (a, b) = (sol.roots.xi01, sol.roots.xi02);
        let mut prev_rho = f64::INFINITY;
        for k in 1..=1000 {
            let xi = a + (b - a) * k as f64 / 1001.0;
            let rho = sol.rho0(xi).unwrap();
            assert!(rho < prev_rho, "rho0 must decrease");
            prev_rho = rho;
            let back = sol.invert_rho0(rho).unwrap();
            assert!((back - xi).abs() <= 1e-9, "eps={eps} xi={xi} back={back}");
            assert!((sol.rho0(back).unwrap() - rho).abs() <= 1e-10);
        }
        assert!((sol.invert_rho0(0.0).unwrap() - sol.xi00).abs() < 1e-12);
    }
}

#[test]
fn endpoint_coefficient_by_sampling() {
    let sol = sphere_midpoint();
    let (x1, x2) = (sol.roots.xi01, sol.roots.xi02);
    // coefficient of the inverse square root in 1/sqrt(T), the factor sqrt(3)/tau being regular
    let integrand = |t: f64| 1.0 / t_oracle(1.0, 3.0, t).sqrt();
    let upper = (3.0 / (8.0 * x2.powf(5.0 / 3.0) - 6.0 * 3.0 * x2)).sqrt();
    let lower = (3.0 / (6.0 * 3.0 * x1 - 8.0 * x1.powf(5.0 / 3.0))).sqrt();
    assert!((sol.endpoint_singularity_coeff(RootSide::Upper).unwrap() - upper).abs() < 1e-12);
    assert!((sol.endpoint_singularity_coeff(RootSide::Lower).unwrap() - lower).abs() < 1e-12);
    for k in 4..=8 {
        let d = 10f64.powi(-k);
        assert!(((d.sqrt() * integrand(x2 - d)) - upper).abs() <= 1e-4, "upper k={k}");
        assert!(((d.sqrt() * integrand(x1 + d)) - lower).abs() <= 1e-4, "lower k={k}");
    }
    // sign of T' at the roots
    let tp = |x: f64| -(8.0 / 3.0) * x.powf(5.0 / 3.0) + 6.0 * x;
    assert!(tp(x1) > 0.0 && tp(x2) < 0.0);
    let flat = ProfileSolution::build(ProfileParams::new(SpaceFormSign::Flat, 1.0)).unwrap();
    assert!(matches!(flat.endpoint_singularity_coeff(RootSide::Lower), Err(Error::NotApplicable(_))));
}

#[test]
fn table_is_strictly_monotone_with_positive_potential() {
    for (eps, c) in [(SpaceFormSign::Spherical, 3.0), (SpaceFormSign::Flat, 1.0), (SpaceFormSign::Hyperbolic, 0.0)] {
        let sol = ProfileSolution::build(ProfileParams::new(eps, c)).unwrap();
        let t = sol.table();
        for w in t.windows(2) {
            assert!(w[1].xi > w[0].xi && w[1].rho < w[0].rho);
        }
        for n in t {
            assert!(n.drho_dxi < 0.0);
            assert!(t_oracle(eps.value(), c, n.xi) > 0.0);
        }
    }
}

#[test]
fn comparison_bound_holds_below_the_base_point() {
    let sol = sphere_midpoint();
    let (x1, x00) = (sol.roots.xi01, sol.xi00);
    for k in 1..=5 {
        let xi = x1 + (x00 - x1) * k as f64 / 6.0;
        let bound = sol.rho0_comparison_bound(xi).unwrap();
        assert!(sol.rho0(xi).unwrap() < bound);
    }
}

#[test]
fn out_of_domain_arguments() {
    let sol = sphere_midpoint();
    assert!(matches!(sol.rho0(sol.roots.xi02 + 0.1), Err(Error::Domain(_))));
    assert!(matches!(sol.invert_rho0(sol.rho_minus - 1.0), Err(Error::Domain(_))));
    assert!(matches!(
        ProfileSolution::build(ProfileParams::new(SpaceFormSign::Spherical, 2.0)),
        Err(Error::Inadmissible(_))
    ));
}
