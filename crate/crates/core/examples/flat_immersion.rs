//! Moving-frame immersion in R^3 compared with the explicit surface.

use biconservative::geometry::GluedMetric;
use biconservative::immersion::{compare_to_oracle, extrinsic_checks, integrate_immersion, GridWindow, ImmersionOptions};
use biconservative::profile::{ProfileParams, ProfileSolution, SpaceFormSign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gm = GluedMetric::from_solution(ProfileSolution::build(ProfileParams::new(SpaceFormSign::Flat, 1.0))?);
    let (a, b) = gm.default_window();
    let window = GridWindow {
        rho_min: a,
        rho_max: b,
        n_rho: 120,
        theta_min: 0.0,
        theta_max: std::f64::consts::TAU,
        n_theta: 120,
    };
    let grid = integrate_immersion(&gm, &window, &ImmersionOptions::default())?;
    let oracle = compare_to_oracle(&grid, &gm)?;
    println!(
        "aligned distance to the explicit surface: max {:.2e}, rms {:.2e} (reflection: {})",
        oracle.max_distance, oracle.rms_distance, oracle.reflection
    );
    for rep in extrinsic_checks(&grid, &gm).reports() {
        println!("  {}", rep.summary());
    }
    Ok(())
}
