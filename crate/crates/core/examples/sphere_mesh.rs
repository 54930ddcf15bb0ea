//! Immersion into S^3, stereographically projected and written as OBJ.

use std::fs::File;
use std::io::BufWriter;

use biconservative::geometry::GluedMetric;
use biconservative::immersion::{
    export_mesh, integrate_immersion, path_independence, GridWindow, ImmersionOptions, MeshFormat, MeshOptions,
    Projection,
};
use biconservative::profile::{ProfileParams, ProfileSolution, SpaceFormSign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gm = GluedMetric::from_solution(ProfileSolution::build(ProfileParams::new(SpaceFormSign::Spherical, 3.0))?);
    let period = gm.profile().period().expect("periodic");
    let m = gm.profile().lattice().rho_minus;
    let window = GridWindow {
        rho_min: m - 0.5 * period,
        rho_max: m + 1.5 * period,
        n_rho: 160,
        theta_min: 0.0,
        theta_max: std::f64::consts::TAU,
        n_theta: 96,
    };
    let opts = ImmersionOptions::default();
    let grid = integrate_immersion(&gm, &window, &opts)?;
    println!("constraint drift {:.1e}, frame drift {:.1e}", grid.max_constraint_error(), grid.max_post_drift());
    let pi = path_independence(&gm, &window, &opts)?;
    println!("rho-first vs theta-first: {:.1e}", pi.max_position_difference);

    let path = std::env::temp_dir().join("biconservative_sphere.obj");
    let mesh = MeshOptions {
        format: MeshFormat::Obj,
        projection: Some(Projection::Stereographic { pole: [0.0, 0.0, 0.0, -1.0] }),
    };
    let summary = export_mesh(&grid, &mesh, &mut BufWriter::new(File::create(&path)?))?;
    println!("{} vertices, {} triangles -> {}", summary.vertices, summary.triangles, path.display());
    Ok(())
}
