//! Command-line front end: `roots`, `profile`, `glue`, `verify`, `immerse`, `mesh`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeodesicProbeReport, GluedMetric, IsothermalReport, CompletenessCheck, LAPLACIAN_CONVENTION};
use crate::gluing::JunctionReport;
use crate::immersion::{
    compare_to_oracle, export_mesh, extrinsic_checks, integrate_immersion, junction_mean_curvature, path_independence,
    verify_biconservative_tangency, verify_codazzi, verify_shape_identities, ExtrinsicReport, GridWindow,
    ImmersionOptions, JunctionMeanCurvature, MeshFormat, MeshOptions, OracleReport, PathIndependence,
};
use crate::profile::{find_roots, ProfileParams, ProfileSolution, RootPair, RootSide, SpaceFormSign};
use crate::report::ResidualReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// The three parameter sets used when no `eps` is given.
pub const DEFAULT_SETS: [(SpaceFormSign, f64); 3] =
    [(SpaceFormSign::Hyperbolic, 0.0), (SpaceFormSign::Flat, 1.0), (SpaceFormSign::Spherical, 3.0)];

const TOLERANCE_KEYS: [&str; 3] = ["immersion.rel_tol", "immersion.abs_tol", "immersion.drift_cap"];

/// Parameter window `(rho_min, rho_max, theta_min, theta_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub rho_min: f64,
    pub rho_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

/// Everything a run needs; loaded from JSON and overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<SpaceFormSign>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi00: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(default = "default_grid")]
    pub grid: (usize, usize),
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_format")]
    pub format: MeshFormat,
}

fn default_grid() -> (usize, usize) {
    (200, 200)
}

fn default_format() -> MeshFormat {
    MeshFormat::Obj
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eps: None,
            c: None,
            xi00: None,
            window: None,
            grid: default_grid(),
            tolerances: BTreeMap::new(),
            out: None,
            workers: None,
            format: default_format(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.0 < 2 || self.grid.1 < 2 {
            return Err(Error::Domain(format!("grid must be at least 2x2, got {:?}", self.grid)));
        }
        if let Some(w) = self.window {
            let all = [w.rho_min, w.rho_max, w.theta_min, w.theta_max];
            if all.iter().any(|x| !x.is_finite()) || w.rho_max <= w.rho_min || w.theta_max <= w.theta_min {
                return Err(Error::Domain(format!("window must be finite and non-empty, got {w:?}")));
            }
        }
        for (k, v) in &self.tolerances {
            if !TOLERANCE_KEYS.contains(&k.as_str()) {
                return Err(Error::Domain(format!("unknown tolerance {k:?}; known: {}", TOLERANCE_KEYS.join(", "))));
            }
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("tolerance {k} must be positive, got {v}")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Domain("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Parameter sets selected by this config: the given one, or all defaults.
    pub fn parameter_sets(&self) -> Vec<(SpaceFormSign, f64)> {
        match (self.eps, self.c) {
            (Some(e), Some(c)) => vec![(e, c)],
            (Some(e), None) => vec![DEFAULT_SETS.iter().copied().find(|d| d.0 == e).expect("every sign has a default")],
            (None, _) => DEFAULT_SETS.to_vec(),
        }
    }

    /// Single parameter set; defaults to `eps = 1, C = 3`.
    pub fn single_set(&self) -> (SpaceFormSign, f64) {
        match self.eps {
            None => (SpaceFormSign::Spherical, self.c.unwrap_or(3.0)),
            Some(_) => self.parameter_sets()[0],
        }
    }

    pub fn params(&self, eps: SpaceFormSign, c: f64) -> ProfileParams {
        let p = ProfileParams::new(eps, c);
        match self.xi00 {
            Some(x) => p.with_base_point(x),
            None => p,
        }
    }

    pub fn immersion_options(&self) -> ImmersionOptions {
        let mut o = ImmersionOptions::default();
        let t = &self.tolerances;
        if let Some(v) = t.get("immersion.rel_tol") {
            o.rel_tol = *v;
        }
        if let Some(v) = t.get("immersion.abs_tol") {
            o.abs_tol = *v;
        }
        if let Some(v) = t.get("immersion.drift_cap") {
            o.drift_cap = *v;
        }
        o
    }

    /// `rho` window from the config or the metric's default, with `theta` over a full turn by default.
    pub fn window_for(&self, gm: &GluedMetric) -> Window {
        self.window.unwrap_or_else(|| {
            let (a, b) = gm.default_window();
            Window {
                rho_min: a,
                rho_max: b,
                theta_min: 0.0,
                theta_max: std::f64::consts::TAU,
            }
        })
    }

    pub fn grid_window(&self, gm: &GluedMetric) -> GridWindow {
        let w = self.window_for(gm);
        GridWindow {
            rho_min: w.rho_min,
            rho_max: w.rho_max,
            n_rho: self.grid.0,
            theta_min: w.theta_min,
            theta_max: w.theta_max,
            n_theta: self.grid.1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bicons", version, about = "Complete non-CMC biconservative surfaces in 3-dimensional space forms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vanishing points of the potential.
    Roots,
    /// Arclength table of the profile block.
    Profile,
    /// Glued profile on a window: rho, F, Gamma, K, f and the junction audit.
    Glue,
    /// Every intrinsic and extrinsic identity; exit 1 on any failure.
    Verify,
    /// Integrate the immersion and report drift, checks and alignment.
    Immerse,
    /// Integrate the immersion and write a mesh.
    Mesh,
}

#[derive(Debug, Args, Default)]
pub struct Flags {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Space form sign: -1, 0 or 1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps: Option<i64>,
    /// Family constant C.
    #[arg(long = "C", global = true, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Base point of the arclength integral.
    #[arg(long, global = true)]
    pub xi00: Option<f64>,
    /// rho_min,rho_max,theta_min,theta_max
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    /// n_rho,n_theta
    #[arg(long, global = true, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    /// Tolerance override NAME=VALUE (also accepted as --tol.NAME VALUE).
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Mesh format: obj, csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,
}

/// Rewrites `--tol.NAME VALUE` and `--tol.NAME=VALUE` into `--tol NAME=VALUE`.
pub fn normalize_args<I: IntoIterator<Item = String>>(args: I) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        match a.strip_prefix("--tol.") {
            Some(rest) => {
                out.push("--tol".into());
                if rest.contains('=') {
                    out.push(rest.to_string());
                } else {
                    let v = it.next().unwrap_or_default();
                    out.push(format!("{rest}={v}"));
                }
            }
            None => out.push(a),
        }
    }
    out
}

impl Flags {
    /// Config file (if any) with flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_json(
                &fs::read_to_string(p).map_err(|e| Error::Domain(format!("reading {}: {e}", p.display())))?,
            )?,
            None => RunConfig::default(),
        };
        if let Some(e) = self.eps {
            cfg.eps = Some(SpaceFormSign::from_int(e)?);
        }
        if let Some(c) = self.c {
            cfg.c = Some(c);
        }
        if let Some(x) = self.xi00 {
            cfg.xi00 = Some(x);
        }
        if let Some(w) = &self.window {
            if w.len() != 4 {
                return Err(Error::Domain("--window takes rho_min,rho_max,theta_min,theta_max".into()));
            }
            cfg.window = Some(Window {
                rho_min: w[0],
                rho_max: w[1],
                theta_min: w[2],
                theta_max: w[3],
            });
        }
        if let Some(g) = &self.grid {
            if g.len() != 2 {
                return Err(Error::Domain("--grid takes n_rho,n_theta".into()));
            }
            cfg.grid = (g[0], g[1]);
        }
        for t in &self.tol {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("tolerance override {t:?} is not NAME=VALUE")))?;
            let v: f64 = v.parse().map_err(|_| Error::Domain(format!("tolerance {k} has non-numeric value {v:?}")))?;
            cfg.tolerances.insert(k.to_string(), v);
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(f) = &self.format {
            cfg.format = f.parse()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Exit code for a pipeline error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Inadmissible(_) | Error::NotApplicable(_) => EXIT_INVALID,
        Error::Numerical(_) | Error::IntegrationQuality(_) | Error::Export(_) => EXIT_NUMERICAL,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(normalize_args(args)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let cfg = match cli.flags.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Some(n) = cfg.workers {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match cli.command {
        Command::Roots => cmd_roots(&cfg),
        Command::Profile => cmd_profile(&cfg),
        Command::Glue => cmd_glue(&cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Immerse => cmd_immerse(&cfg),
        Command::Mesh => cmd_mesh(&cfg),
    };
    match result {
        Ok(passed) => {
            if passed {
                EXIT_OK
            } else {
                EXIT_VERIFY
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Writes `text` to `out/name`, or to stdout when no output directory is set.
fn emit(cfg: &RunConfig, name: &str, text: &str) -> Result<()> {
    match &cfg.out {
        Some(dir) => write_file(dir, name, text),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| Error::Export(e.to_string()))?;
            if !text.ends_with('\n') {
                so.write_all(b"\n").map_err(|e| Error::Export(e.to_string()))?;
            }
            Ok(())
        }
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Export(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| Error::Export(format!("{}: {e}", p.display())))?;
    eprintln!("wrote {}", p.display());
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

#[derive(Debug, Clone, Serialize)]
pub struct RootsRow {
    pub eps: SpaceFormSign,
    #[serde(rename = "C")]
    pub c: f64,
    pub roots: RootPair,
}

pub fn cmd_roots(cfg: &RunConfig) -> Result<bool> {
    let mut rows = Vec::new();
    let mut table = format!("{:>4} {:>10} {:>24} {:>24} {:>24}\n", "eps", "C", "xi01", "xi02", "xi_star");
    for (eps, c) in cfg.parameter_sets() {
        let roots = find_roots(&ProfileParams::new(eps, c))?;
        let star = roots.xi_star.map_or("-".to_string(), |x| format!("{x:.17e}"));
        let _ = writeln!(table, "{:>4} {:>10} {:>24.17e} {:>24.17e} {:>24}", eps.as_i8(), c, roots.xi01, roots.xi02, star);
        rows.push(RootsRow { eps, c, roots });
    }
    print!("{table}");
    emit(cfg, "roots.json", &to_json(&rows))?;
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub params: ProfileParams,
    pub roots: RootPair,
    pub xi00: f64,
    pub rho_minus: f64,
    /// `null` when the block is unbounded above.
    pub rho_plus: Option<f64>,
    pub block_width: Option<f64>,
    pub endpoint_coeff_upper: Option<f64>,
    pub endpoint_coeff_lower: Option<f64>,
    pub table_nodes: usize,
}

pub fn cmd_profile(cfg: &RunConfig) -> Result<bool> {
    let (eps, c) = cfg.single_set();
    let sol = ProfileSolution::build(cfg.params(eps, c))?;
    let summary = ProfileSummary {
        params: sol.params,
        roots: sol.roots,
        xi00: sol.xi00,
        rho_minus: sol.rho_minus,
        rho_plus: sol.rho_plus.finite(),
        block_width: sol.block_width(),
        endpoint_coeff_upper: sol.endpoint_singularity_coeff(RootSide::Upper).ok(),
        endpoint_coeff_lower: sol.endpoint_singularity_coeff(RootSide::Lower).ok(),
        table_nodes: sol.table().len(),
    };
    match &cfg.out {
        Some(dir) => {
            write_file(dir, "profile_table.csv", &sol.table_csv())?;
            write_file(dir, "profile.json", &to_json(&summary))?;
        }
        None => {
            print!("{}", sol.table_csv());
            eprintln!("{}", to_json(&summary));
        }
    }
    Ok(true)
}

/// `rho, F, Gamma, K, f` on the window's `rho` grid.
pub fn glue_csv(gm: &GluedMetric, a: f64, b: f64, n: usize) -> String {
    let mut s = String::from("rho,F,Gamma,K,f\n");
    for i in 0..n {
        let rho = if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
        let f = gm.profile().eval_f(rho);
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            rho,
            f,
            1.0 / f,
            gm.gauss_curvature(rho),
            gm.mean_curvature_f(rho)
        );
    }
    s
}

pub fn cmd_glue(cfg: &RunConfig) -> Result<bool> {
    let (eps, c) = cfg.single_set();
    let gm = GluedMetric::from_solution(ProfileSolution::build(cfg.params(eps, c))?);
    let w = cfg.window_for(&gm);
    let csv = glue_csv(&gm, w.rho_min, w.rho_max, cfg.grid.0);
    let report = gm.profile().junction_smoothness_report(w.rho_min, w.rho_max)?;
    match &cfg.out {
        Some(dir) => {
            write_file(dir, "glue.csv", &csv)?;
            write_file(dir, "junctions.json", &to_json(&report))?;
        }
        None => {
            print!("{csv}");
            eprintln!("{}", to_json(&report));
        }
    }
    Ok(report.passed)
}

/// All checks for one parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct ParameterSetReport {
    pub eps: SpaceFormSign,
    #[serde(rename = "C")]
    pub c: f64,
    pub window: (f64, f64),
    pub alpha_expected: f64,
    pub residuals: Vec<ResidualReport>,
    pub junctions: JunctionReport,
    pub isothermal: IsothermalReport,
    pub completeness: CompletenessCheck,
    pub geodesics: GeodesicProbeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub junction_mean_curvature: Option<JunctionMeanCurvature>,
    pub failures: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub sign_convention: String,
    pub normal_orientation: String,
    pub sets: Vec<ParameterSetReport>,
    pub passed: bool,
}

/// Deterministic, well spread geodesic starts `(rho, theta, angle)` in `[a, b]`.
pub fn probe_starts(a: f64, b: f64, n: usize) -> Vec<(f64, f64, f64)> {
    const G1: f64 = 0.618_033_988_749_894_8;
    const G2: f64 = 0.754_877_666_246_692_7;
    (0..n)
        .map(|k| {
            let k = k as f64 + 0.5;
            let x = (k * G1).fract();
            let y = (k * G2).fract();
            (a + (b - a) * x, 0.0, std::f64::consts::TAU * y)
        })
        .collect()
}

/// Runs every verifier for one parameter set over `[a, b]` with `n` sweep points.
pub fn verify_parameter_set(gm: &GluedMetric, a: f64, b: f64, n: usize) -> Result<ParameterSetReport> {
    let residuals = vec![
        gm.verify_curvature_ode(a, b, n)?,
        gm.verify_first_integral(a, b, n)?,
        gm.verify_laplace_identity(a, b, n)?,
        gm.verify_bicons_pde(a, b, n)?,
        gm.verify_warped_curvature(a, b, n)?,
        gm.verify_omega_kappa(a, b, n)?,
        gm.verify_frame_relations(a, b, n)?,
        verify_codazzi(gm, a, b, n)?,
        verify_biconservative_tangency(gm, a, b, n)?,
        verify_shape_identities(gm, a, b, n)?,
    ];
    let junctions = gm.profile().junction_smoothness_report(a, b)?;
    let isothermal = gm.verify_isothermal_form(a, b, n)?;
    let completeness = gm.completeness_check(a, b, n);
    let geodesics = gm.geodesic_probes(&probe_starts(a, b, 100), 100.0, (a, b));
    let jmc = (gm.eps() == SpaceFormSign::Spherical).then(|| junction_mean_curvature(gm));

    let mut failures: Vec<String> = residuals.iter().filter(|r| !r.passed).map(|r| r.identity.clone()).collect();
    let mut flag = |ok: bool, name: &str| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    flag(junctions.passed, "junction_smoothness");
    flag(isothermal.passed, "isothermal_form");
    flag(completeness.passed, "completeness_comparison");
    flag(geodesics.passed, "geodesic_probes");
    flag(jmc.as_ref().map_or(true, |j| j.passed), "junction_mean_curvature");
    let passed = failures.is_empty();
    Ok(ParameterSetReport {
        eps: gm.eps(),
        c: gm.c(),
        window: (a, b),
        alpha_expected: gm.alpha_expected(),
        residuals,
        junctions,
        isothermal,
        completeness,
        geodesics,
        junction_mean_curvature: jmc,
        failures,
        passed,
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<bool> {
    let mut sets = Vec::new();
    for (eps, c) in cfg.parameter_sets() {
        let gm = GluedMetric::from_solution(ProfileSolution::build(cfg.params(eps, c))?);
        let (a, b) = match cfg.window {
            Some(w) => (w.rho_min, w.rho_max),
            None => gm.default_window(),
        };
        let rep = verify_parameter_set(&gm, a, b, 10 * cfg.grid.0 + 1)?;
        eprintln!("eps={eps} C={c} window=[{a:.6}, {b:.6}]");
        for r in &rep.residuals {
            eprintln!("  {}", r.summary());
        }
        for f in &rep.failures {
            eprintln!("  FAILED: {f}");
        }
        sets.push(rep);
    }
    let passed = sets.iter().all(|s| s.passed);
    let report = VerificationReport {
        sign_convention: LAPLACIAN_CONVENTION.to_string(),
        normal_orientation: "N chosen so that trace A = f > 0".to_string(),
        sets,
        passed,
    };
    emit(cfg, "verify.json", &to_json(&report))?;
    Ok(passed)
}

#[derive(Debug, Clone, Serialize)]
pub struct ImmersionReport {
    pub eps: SpaceFormSign,
    #[serde(rename = "C")]
    pub c: f64,
    pub window: GridWindow,
    pub options: ImmersionOptions,
    pub max_pre_correction_drift: f64,
    pub max_post_correction_drift: f64,
    pub max_constraint_error: f64,
    pub extrinsic: ExtrinsicReport,
    pub path_independence: PathIndependence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    pub passed: bool,
}

pub fn cmd_immerse(cfg: &RunConfig) -> Result<bool> {
    let (eps, c) = cfg.single_set();
    let gm = GluedMetric::from_solution(ProfileSolution::build(cfg.params(eps, c))?);
    let window = cfg.grid_window(&gm);
    let opts = cfg.immersion_options();
    let grid = integrate_immersion(&gm, &window, &opts)?;
    let extrinsic = extrinsic_checks(&grid, &gm);
    let pi = path_independence(&gm, &window, &opts)?;
    let oracle = if eps == SpaceFormSign::Flat { Some(compare_to_oracle(&grid, &gm)?) } else { None };
    let passed = grid.max_post_drift() <= 1e-7
        && grid.max_constraint_error() <= 1e-8
        && pi.passed
        && oracle.as_ref().map_or(true, |o| o.passed);
    let report = ImmersionReport {
        eps,
        c,
        window,
        options: opts,
        max_pre_correction_drift: grid.max_pre_drift(),
        max_post_correction_drift: grid.max_post_drift(),
        max_constraint_error: grid.max_constraint_error(),
        extrinsic,
        path_independence: pi,
        oracle,
        passed,
    };
    eprintln!("finite-difference diagnostics (resolution dependent):");
    for r in report.extrinsic.reports() {
        eprintln!("  {}", r.summary());
    }
    if let Some(o) = &report.oracle {
        eprintln!("  oracle max aligned distance {:.3e}", o.max_distance);
    }
    eprintln!("  constraint drift {:.3e}, frame drift {:.3e}", report.max_constraint_error, report.max_post_correction_drift);
    if let Some(dir) = &cfg.out {
        let mut buf = Vec::new();
        export_mesh(&grid, &MeshOptions::new(MeshFormat::Csv), &mut buf)?;
        write_file(dir, "immersion.csv", &String::from_utf8(buf).expect("CSV is UTF-8"))?;
    }
    emit(cfg, "immerse.json", &to_json(&report))?;
    Ok(passed)
}

pub fn cmd_mesh(cfg: &RunConfig) -> Result<bool> {
    let (eps, c) = cfg.single_set();
    let gm = GluedMetric::from_solution(ProfileSolution::build(cfg.params(eps, c))?);
    let grid = integrate_immersion(&gm, &cfg.grid_window(&gm), &cfg.immersion_options())?;
    let mut buf = Vec::new();
    let summary = export_mesh(&grid, &MeshOptions::new(cfg.format), &mut buf)?;
    let ext = match cfg.format {
        MeshFormat::Obj => "obj",
        MeshFormat::Csv => "csv",
        MeshFormat::Json => "json",
    };
    emit(cfg, &format!("mesh.{ext}"), &String::from_utf8(buf).expect("mesh text is UTF-8"))?;
    eprintln!("{} vertices, {} triangles", summary.vertices, summary.triangles);
    Ok(true)
}
