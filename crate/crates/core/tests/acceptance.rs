//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use biconservative::cli::verify_parameter_set;
use biconservative::geometry::GluedMetric;
use biconservative::gluing::GluedProfile;
use biconservative::immersion::{
    compare_to_oracle, extrinsic_checks, integrate_immersion, junction_mean_curvature, path_independence, GridWindow,
    ImmersionOptions,
};
use biconservative::profile::{find_roots, ProfileParams, ProfileSolution, RootSide, SpaceFormSign};
use rand::{Rng, SeedableRng};

const DEFAULTS: [(SpaceFormSign, f64); 3] = [(SpaceFormSign::Hyperbolic, 0.0), (SpaceFormSign::Flat, 1.0), (SpaceFormSign::Spherical, 3.0)];
const TAU: f64 = std::f64::consts::TAU;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn metric(eps: SpaceFormSign, c: f64) -> GluedMetric {
    GluedMetric::from_solution(ProfileSolution::build(ProfileParams::new(eps, c)).unwrap())
}

fn t_oracle(eps: f64, c: f64, x: f64) -> f64 {
    -x.powf(8.0 / 3.0) + c * x * x - 3.0 * eps
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!("{}; {:.2} s (limit {} s)", out.detail, took.as_secs_f64(), limit.as_secs());
    out.ok &= took < limit;
    out
}

fn roots() -> Outcome {
    let mut worst: f64 = 0.0;
    for c in [1.0f64, 4.0, 9.0] {
        let r = find_roots(&ProfileParams::new(SpaceFormSign::Flat, c)).unwrap();
        worst = worst.max((r.xi02 - c.powf(1.5)).abs() / c.powf(1.5));
    }
    let r = find_roots(&ProfileParams::new(SpaceFormSign::Hyperbolic, 0.0)).unwrap();
    let x = 3f64.powf(3.0 / 8.0);
    worst = worst.max((r.xi02 - x).abs() / x);
    check(worst <= 1e-12, format!("max relative error {worst:.2e}"))
}

fn profile_limits() -> Outcome {
    let sol = ProfileSolution::build(ProfileParams::new(SpaceFormSign::Spherical, 3.0)).unwrap();
    let (lo, hi) = sol.rho0_limits();
    let Some(hi) = hi.finite() else {
        return check(false, "rho_{0,1} is not finite");
    };
    let ordered = lo.is_finite() && lo < 0.0 && hi > 0.0;
    let (lo2, hi2) = sol.rho0_limits_tanh_sinh(1e-14).unwrap();
    let agree = (lo - lo2).abs().max((hi - hi2.unwrap_or(f64::NAN)).abs());
    let (x1, x2) = (sol.roots.xi01, sol.roots.xi02);
    let upper = sol.endpoint_singularity_coeff(RootSide::Upper).unwrap();
    let expected = (3.0 / (8.0 * x2.powf(5.0 / 3.0) - 6.0 * 3.0 * x2)).sqrt();
    let lower = sol.endpoint_singularity_coeff(RootSide::Lower).unwrap();
    let mut sample_err: f64 = (upper - expected).abs();
    for k in 4..=8 {
        let d = 10f64.powi(-k);
        sample_err = sample_err.max((d.sqrt() / t_oracle(1.0, 3.0, x2 - d).sqrt() - upper).abs());
        sample_err = sample_err.max((d.sqrt() / t_oracle(1.0, 3.0, x1 + d).sqrt() - lower).abs());
    }
    check(
        ordered && agree <= 1e-8 && sample_err <= 1e-4,
        format!("rho(-1)={lo:.10} rho(1)={hi:.10}; rules differ by {agree:.2e}; endpoint sampling {sample_err:.2e}"),
    )
}

fn gluing() -> Outcome {
    let g = GluedProfile::new(ProfileSolution::build(ProfileParams::new(SpaceFormSign::Spherical, 3.0)).unwrap());
    let period = g.period().unwrap();
    let (m, p) = (g.lattice().rho_minus, g.lattice().rho_plus.finite().unwrap());
    let period_ok = (period - 2.0 * (p - m)).abs() <= 1e-14 * period;
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let mut periodic: f64 = 0.0;
    for _ in 0..1000 {
        let rho = rng.gen_range(-50.0..50.0);
        periodic = periodic.max((g.eval_f(rho) - g.eval_f(rho + period)).abs());
    }
    let (x1, x2) = (g.solution().roots.xi01, g.solution().roots.xi02);
    let mut parity = true;
    for r in (-8..=8).filter(|&r| r != 0) {
        let want = if (r > 0 && r % 2 == 0) || (r < 0 && r % 2 != 0) { x2 } else { x1 };
        parity &= g.eval_f(g.lattice_point(r).unwrap()) == want;
    }
    let (a, b) = g.default_window();
    let audit = g.junction_smoothness_report(a, b).unwrap();
    let mut monotone = true;
    let js = g.junctions_in(a, b);
    for w in js.windows(2) {
        let (fa, fb) = (g.eval_f(w[0].1), g.eval_f(w[1].1));
        monotone &= fa != fb;
        let mut prev = fa;
        for k in 1..=200 {
            let v = g.eval_f(w[0].1 + (w[1].1 - w[0].1) * k as f64 / 200.0);
            monotone &= if fb > fa { v >= prev } else { v <= prev };
            prev = v;
        }
    }
    check(
        period_ok && periodic <= 1e-10 && parity && audit.passed && monotone && js.len() >= 3,
        format!(
            "periodicity {periodic:.2e}; parity {}; audit mismatch {:.1e}/{:.1e}/{:.1e}; {} monotone arcs",
            if parity { "exact" } else { "wrong" },
            audit.max_mismatch[0],
            audit.max_mismatch[1],
            audit.max_mismatch[2],
            js.len().saturating_sub(1)
        ),
    )
}

/// Independent algebraic check of the first-integral constant over random arguments.
fn alpha_relation_holds() -> bool {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    (0..1000).all(|_| {
        let eps = [-1.0, 0.0, 1.0][rng.gen_range(0..3)];
        let (u, c): (f64, f64) = (rng.gen_range(0.5..4.0), rng.gen_range(-2.0..10.0));
        let d = u.powf(8.0 / 3.0) / 9.0;
        let k = eps - d;
        let dk2 = (8.0 / 27.0 * u.powf(8.0 / 3.0)).powi(2) * t_oracle(eps, c, u) / 3.0;
        let lhs = dk2 - 64.0 / 3.0 * k.powi(3) + 640.0 / 9.0 * eps * k * k - 704.0 / 9.0 * eps * eps * k + 256.0 / 9.0 * eps.powi(3);
        let alpha = 64.0 * c / (3.0 * 3f64.sqrt());
        (lhs / d.powf(11.0 / 4.0) - alpha).abs() <= 1e-9 * alpha.abs().max(1.0)
    })
}

fn intrinsic() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = alpha_relation_holds();
    let mut notes = Vec::new();
    for (eps, c) in DEFAULTS {
        let gm = metric(eps, c);
        let (a, b) = gm.default_window();
        let n = 2001;
        for r in [
            gm.verify_curvature_ode(a, b, n).unwrap(),
            gm.verify_laplace_identity(a, b, n).unwrap(),
            gm.verify_bicons_pde(a, b, n).unwrap(),
            gm.verify_first_integral(a, b, n).unwrap(),
        ] {
            ok &= r.passed && r.threshold <= 1e-6;
            worst = worst.max(r.max_residual);
        }
        let iso = gm.verify_isothermal_form(a, b, n).unwrap();
        ok &= iso.ode.passed && iso.first_integral.passed;
        worst = worst.max(iso.ode.max_residual);
        ok &= (gm.alpha_expected() - 64.0 * c / (3.0 * 3f64.sqrt())).abs() <= 1e-15 * c.abs().max(1.0);
        notes.push(format!("eps={}", eps.as_i8()));
    }
    check(ok, format!("{}: worst scaled residual {worst:.2e}", notes.join(",")))
}

fn frames() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (eps, c) in DEFAULTS {
        let gm = metric(eps, c);
        let (a, b) = gm.default_window();
        let rep = verify_parameter_set(&gm, a, b, 2001).unwrap();
        let limits = [("frame_relations", 1e-7), ("codazzi", 1e-7), ("biconservative_tangency", 1e-10), ("shape_operator_identities", 1e-12)];
        for (name, tol) in limits {
            let r = rep.residuals.iter().find(|r| r.identity == name).unwrap();
            ok &= r.max_residual <= tol;
            detail.push(format!("{name}[{}]={:.1e}", eps.as_i8(), r.max_residual));
        }
    }
    check(ok, detail.join(" "))
}

fn flat_oracle() -> Outcome {
    let gm = metric(SpaceFormSign::Flat, 1.0);
    let (a, b) = gm.default_window();
    let w = GridWindow { rho_min: a, rho_max: b, n_rho: 200, theta_min: 0.0, theta_max: TAU, n_theta: 200 };
    let grid = integrate_immersion(&gm, &w, &ImmersionOptions::default()).unwrap();
    let oracle = compare_to_oracle(&grid, &gm).unwrap();
    let ext = extrinsic_checks(&grid, &gm);
    check(
        oracle.max_distance <= 1e-5 && ext.induced_metric.max_residual <= 1e-7,
        format!("aligned distance {:.2e}; induced metric {:.2e}", oracle.max_distance, ext.induced_metric.max_residual),
    )
}

fn sphere_immersion() -> Outcome {
    let gm = metric(SpaceFormSign::Spherical, 3.0);
    let m = gm.profile().lattice().rho_minus;
    let p = gm.profile().period().unwrap();
    let w = GridWindow { rho_min: m - 0.5 * p, rho_max: m + 1.5 * p, n_rho: 200, theta_min: 0.0, theta_max: TAU, n_theta: 200 };
    let opts = ImmersionOptions::default();
    let grid = integrate_immersion(&gm, &w, &opts).unwrap();
    let pi = path_independence(&gm, &w, &opts).unwrap();
    let (cons, gram) = (grid.max_constraint_error(), grid.max_post_drift());
    let diff = pi.max_position_difference.max(pi.max_frame_difference);
    check(
        cons <= 1e-8 && gram <= 1e-7 && diff <= 1e-5,
        format!("constraint {cons:.2e}; Gram {gram:.2e}; path independence {diff:.2e}"),
    )
}

fn completeness() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut ok = true;
    let mut detail = Vec::new();
    for (eps, c) in DEFAULTS {
        let gm = metric(eps, c);
        let (a, b) = gm.default_window();
        let starts: Vec<(f64, f64, f64)> = (0..100).map(|_| (rng.gen_range(a..b), rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU))).collect();
        let rep = gm.geodesic_probes(&starts, 100.0, (a, b));
        ok &= rep.probes == 100
            && rep.failures == 0
            && rep.max_speed_drift <= 1e-8
            && rep.max_clairaut_drift <= 1e-8
            && rep.junction_lines > 0
            && rep.max_junction_departure <= 1e-8;
        detail.push(format!(
            "eps={}: speed {:.1e} Clairaut {:.1e} junction {:.1e}",
            eps.as_i8(),
            rep.max_speed_drift,
            rep.max_clairaut_drift,
            rep.max_junction_departure
        ));
    }
    check(ok, detail.join("; "))
}

fn junction_values() -> Outcome {
    let gm = metric(SpaceFormSign::Spherical, 3.0);
    let rep = junction_mean_curvature(&gm);
    let (x1, x2) = (gm.profile().solution().roots.xi01, gm.profile().solution().roots.xi02);
    let mut gap = f64::INFINITY;
    for x in [x1, x2] {
        let f2 = 4.0 / 27.0 * x.powf(8.0 / 3.0);
        gap = gap.min(f2.abs()).min((f2 - 4.0 / 3.0).abs());
    }
    check(
        gap > 1e-6 && rep.passed && (rep.min_gap - gap).abs() <= 1e-12,
        format!("f^2 at junctions {:.6}, {:.6}; smallest gap {gap:.3e}", rep.values[0].1, rep.values[1].1),
    )
}

fn main() {
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("1 roots", Box::new(|| timed(Duration::from_secs(1), roots))),
        ("2 profile limits", Box::new(|| timed(Duration::from_secs(5), profile_limits))),
        ("3 gluing", Box::new(gluing)),
        ("4 intrinsic identities", Box::new(|| timed(Duration::from_secs(30), intrinsic))),
        ("5 frame and Codazzi", Box::new(frames)),
        ("6 flat oracle", Box::new(|| timed(Duration::from_secs(60), flat_oracle))),
        ("7 spherical immersion", Box::new(sphere_immersion)),
        ("8 completeness probes", Box::new(completeness)),
        ("9 junction values", Box::new(junction_values)),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let out = run();
        println!("criterion {name}: {} ({})", if out.ok { "PASS" } else { "FAIL" }, out.detail);
        failed += usize::from(!out.ok);
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
