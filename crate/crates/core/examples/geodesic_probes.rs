//! Long unit-speed geodesics: speed, Clairaut's quantity and the junction lines.

use biconservative::cli::probe_starts;
use biconservative::geometry::GluedMetric;
use biconservative::profile::{ProfileParams, ProfileSolution, SpaceFormSign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gm = GluedMetric::from_solution(ProfileSolution::build(ProfileParams::new(SpaceFormSign::Spherical, 3.0))?);
    let (a, b) = gm.default_window();

    let start = gm.unit_state(0.2, 0.0, 1.0);
    let traj = gm.geodesic_integrate(start, 100.0, 4)?;
    for s in &traj {
        println!(
            "s={:>5.1} rho={:+.6} theta={:+.6} |v|^2-1={:+.1e} clairaut={:.12}",
            s.arclength,
            s.rho,
            s.theta,
            gm.speed_squared(s) - 1.0,
            gm.clairaut(s)
        );
    }

    let rep = gm.geodesic_probes(&probe_starts(a, b, 100), 100.0, (a, b));
    println!(
        "{} probes, {} failures, speed drift {:.1e}, Clairaut drift {:.1e}, junction departure {:.1e}",
        rep.probes, rep.failures, rep.max_speed_drift, rep.max_clairaut_drift, rep.max_junction_departure
    );
    Ok(())
}
