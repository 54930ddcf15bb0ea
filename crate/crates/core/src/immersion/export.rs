//! Mesh and point-cloud output for integrated grids.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{ImmersionGrid, Vec4};
use crate::error::{Error, Result};
use crate::profile::SpaceFormSign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Obj,
    Csv,
    Json,
}

impl std::str::FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(Self::Obj),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::domain(format!("unknown mesh format {other:?}"))),
        }
    }
}

/// Map from the ambient model to `R^3` used for OBJ output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Only valid for the flat model.
    Identity,
    /// From `S^3` through the unit pole `pole`.
    Stereographic { pole: Vec4 },
    /// `H^3` onto the Poincare ball.
    PoincareBall,
}

impl Projection {
    pub fn default_for(eps: SpaceFormSign) -> Self {
        match eps {
            SpaceFormSign::Flat => Self::Identity,
            SpaceFormSign::Spherical => Self::Stereographic { pole: [-1.0, 0.0, 0.0, 0.0] },
            SpaceFormSign::Hyperbolic => Self::PoincareBall,
        }
    }

    fn check(&self, eps: SpaceFormSign) -> Result<()> {
        let ok = matches!(
            (self, eps),
            (Self::Identity, SpaceFormSign::Flat)
                | (Self::Stereographic { .. }, SpaceFormSign::Spherical)
                | (Self::PoincareBall, SpaceFormSign::Hyperbolic)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::Export(format!("projection {self:?} does not apply to eps = {eps}")))
        }
    }

    /// Projects one ambient point; `node` is used in error messages.
    pub fn apply(&self, p: &Vec4, node: (usize, usize)) -> Result<[f64; 3]> {
        match self {
            Self::Identity => Ok([p[1], p[2], p[3]]),
            Self::PoincareBall => {
                let d = 1.0 + p[0];
                Ok([p[1] / d, p[2] / d, p[3] / d])
            }
            Self::Stereographic { pole } => {
                let norm = pole.iter().map(|x| x * x).sum::<f64>().sqrt();
                let q = pole.map(|x| x / norm);
                let dot: f64 = (0..4).map(|i| p[i] * q[i]).sum();
                let denom = 1.0 - dot;
                if denom.abs() < 1e-12 {
                    return Err(Error::Export(format!(
                        "node (i_rho={}, i_theta={}) lies at the projection pole",
                        node.0, node.1
                    )));
                }
                let basis = complement_basis(&q);
                let mut out = [0.0; 3];
                for (k, b) in basis.iter().enumerate() {
                    out[k] = (0..4).map(|i| p[i] * b[i]).sum::<f64>() / denom;
                }
                Ok(out)
            }
        }
    }
}

/// Orthonormal basis of `q^perp` in `R^4`, right-handed with `q` first.
fn complement_basis(q: &Vec4) -> [Vec4; 3] {
    let mut basis: Vec<Vec4> = vec![*q];
    for k in 0..4 {
        if basis.len() == 4 {
            break;
        }
        let mut v = [0.0; 4];
        v[k] = 1.0;
        for b in &basis {
            let d: f64 = (0..4).map(|i| v[i] * b[i]).sum();
            for i in 0..4 {
                v[i] -= d * b[i];
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(v.map(|x| x / n));
        }
    }
    [basis[1], basis[2], basis[3]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    pub format: MeshFormat,
    /// `None` picks the default map for the grid's ambient model.
    pub projection: Option<Projection>,
}

impl MeshOptions {
    pub fn new(format: MeshFormat) -> Self {
        Self { format, projection: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub triangles: usize,
    pub bytes: usize,
}

/// Writes the grid as OBJ (projected triangles), CSV (raw ambient coordinates) or JSON.
pub fn export_mesh<W: Write>(grid: &ImmersionGrid, opts: &MeshOptions, out: &mut W) -> Result<MeshSummary> {
    let (nr, nt) = (grid.rho.len(), grid.theta.len());
    if grid.frames.len() != nr * nt || nr < 2 || nt < 2 {
        return Err(Error::Export("grid is incomplete".into()));
    }
    let text = match opts.format {
        MeshFormat::Obj => obj_text(grid, opts.projection.unwrap_or(Projection::default_for(grid.eps())))?,
        MeshFormat::Csv => csv_text(grid),
        MeshFormat::Json => serde_json::to_string_pretty(grid).map_err(|e| Error::Export(e.to_string()))?,
    };
    out.write_all(text.as_bytes()).map_err(|e| Error::Export(e.to_string()))?;
    Ok(MeshSummary {
        vertices: nr * nt,
        triangles: 2 * (nr - 1) * (nt - 1),
        bytes: text.len(),
    })
}

fn obj_text(grid: &ImmersionGrid, proj: Projection) -> Result<String> {
    use std::fmt::Write as _;
    proj.check(grid.eps())?;
    let (nr, nt) = (grid.rho.len(), grid.theta.len());
    let mut s = String::new();
    let _ = writeln!(s, "# biconservative surface eps={} grid {}x{}", grid.eps(), nr, nt);
    for i in 0..nr {
        for j in 0..nt {
            let p = proj.apply(&grid.frame(i, j).phi, (i, j))?;
            let _ = writeln!(s, "v {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
        }
    }
    for i in 0..nr - 1 {
        for j in 0..nt - 1 {
            let a = i * nt + j + 1;
            let b = a + nt;
            let _ = writeln!(s, "f {} {} {}", a, b, b + 1);
            let _ = writeln!(s, "f {} {} {}", a, b + 1, a + 1);
        }
    }
    Ok(s)
}

fn csv_text(grid: &ImmersionGrid) -> String {
    use std::fmt::Write as _;
    let dim = grid.model.embedding_dim();
    let names: &[&str] = if dim == 3 { &["x", "y", "z"] } else { &["x0", "x1", "x2", "x3"] };
    let mut s = format!("rho,theta,{},drift\n", names.join(","));
    for (i, &r) in grid.rho.iter().enumerate() {
        for (j, &t) in grid.theta.iter().enumerate() {
            let _ = write!(s, "{r:.16e},{t:.16e}");
            for c in grid.model.coordinates(&grid.frame(i, j).phi) {
                let _ = write!(s, ",{c:.16e}");
            }
            let _ = writeln!(s, ",{:.16e}", grid.drift[grid.index(i, j)].post_correction);
        }
    }
    s
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvPoint {
    pub rho: f64,
    pub theta: f64,
    pub coords: Vec<f64>,
    pub drift: f64,
}

/// Parses the CSV written by [`export_mesh`].
pub fn read_csv_points(text: &str) -> Result<Vec<CsvPoint>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Export("empty CSV".into()))?;
    let cols = header.split(',').count();
    if cols < 5 {
        return Err(Error::Export(format!("unexpected CSV header {header:?}")));
    }
    lines
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(k, l)| {
            let v = l
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Export(format!("row {}: {e}", k + 1)))?;
            if v.len() != cols {
                return Err(Error::Export(format!("row {} has {} fields, expected {cols}", k + 1, v.len())));
            }
            Ok(CsvPoint {
                rho: v[0],
                theta: v[1],
                coords: v[2..cols - 1].to_vec(),
                drift: v[cols - 1],
            })
        })
        .collect()
}
