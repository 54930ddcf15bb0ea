//! Residuals of the intrinsic identities for the three default parameter sets.

use biconservative::geometry::GluedMetric;
use biconservative::profile::{ProfileParams, ProfileSolution, SpaceFormSign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (eps, c) in [(SpaceFormSign::Hyperbolic, 0.0), (SpaceFormSign::Flat, 1.0), (SpaceFormSign::Spherical, 3.0)] {
        let gm = GluedMetric::from_solution(ProfileSolution::build(ProfileParams::new(eps, c))?);
        let (a, b) = gm.default_window();
        println!("eps={eps} C={c}, alpha = {:.12}", gm.alpha_expected());
        for rep in [
            gm.verify_curvature_ode(a, b, 1001)?,
            gm.verify_first_integral(a, b, 1001)?,
            gm.verify_laplace_identity(a, b, 1001)?,
            gm.verify_bicons_pde(a, b, 1001)?,
            gm.verify_frame_relations(a, b, 1001)?,
        ] {
            println!("  {}", rep.summary());
        }
        let iso = gm.verify_isothermal_form(a, b, 1001)?;
        println!("  {}", iso.ode.summary());
    }
    Ok(())
}
