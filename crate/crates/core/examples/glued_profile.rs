//! The glued profile F on the sphere: period, junction values and a CSV sample.

use biconservative::gluing::GluedProfile;
use biconservative::profile::{ProfileParams, ProfileSolution, SpaceFormSign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sol = ProfileSolution::build(ProfileParams::new(SpaceFormSign::Spherical, 3.0))?;
    let gp = GluedProfile::new(sol);
    let period = gp.period().expect("periodic on the sphere");
    println!("period = {period:.12}");

    let (a, b) = gp.default_window();
    for (r, rho) in gp.junctions_in(a, b) {
        println!("junction r={r:>2} rho={rho:>+.10} F={:.10}", gp.eval_f(rho));
    }

    let x = 0.3;
    println!("F(x) - F(x + period) = {:.2e}", gp.eval_f(x) - gp.eval_f(x + period));

    let report = gp.junction_smoothness_report(a, b)?;
    println!("C^3 audit passed: {} (max mismatch {:?})", report.passed, &report.max_mismatch[..3]);

    // Same data the `glue` command writes; pipe into any plotting tool.
    let csv = gp.csv_window(a, b, 9);
    print!("{csv}");
    Ok(())
}
