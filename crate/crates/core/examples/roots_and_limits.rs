//! Roots of the potential and the arclength limits of the profile block.

use biconservative::profile::{find_roots, ProfileParams, ProfileSolution, RootSide, SpaceFormSign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (eps, c) in [(SpaceFormSign::Hyperbolic, 0.0), (SpaceFormSign::Flat, 4.0), (SpaceFormSign::Spherical, 3.0)] {
        let params = ProfileParams::new(eps, c);
        let roots = find_roots(&params)?;
        let sol = ProfileSolution::build(params)?;
        let (lo, hi) = sol.rho0_limits();
        println!("eps={eps:>2} C={c}: xi01={:.12} xi02={:.12}", roots.xi01, roots.xi02);
        println!("    rho0 limits: {lo:.12} .. {:?}", hi.finite());
        println!("    endpoint coefficient at xi02: {:.10}", sol.endpoint_singularity_coeff(RootSide::Upper)?);
    }

    // eps = 1 needs C > 4/sqrt(3)
    if let Err(e) = find_roots(&ProfileParams::new(SpaceFormSign::Spherical, 2.0)) {
        println!("C = 2 on the sphere: {e}");
    }
    Ok(())
}
