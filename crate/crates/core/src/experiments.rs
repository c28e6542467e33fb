//! End-to-end drivers: solve, condition-number sweeps and the convergence
//! study, writing CSV/JSON/SVG artifacts that carry their configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{self, assemble_rhs, assemble_rhs_neumann, assemble_w, QuadratureConfig};
use crate::error::{Error, Result};
use crate::geometry::{self as g, Vec3};
use crate::jump::{build_prolongation, expand, JumpVector};
use crate::mesh::{plus_tips, refine_graded, refine_uniform_times, resolve_geometry, SurfaceMesh};
use crate::multiscreen::{inflate, InflatedMesh, InflationSummary};
use crate::plot::{self, PlotSpec};
use crate::potential::{eval_dl, exact_plus_gradient, exact_plus_solution, grid_error, EvaluationGrid};
use crate::precond::{condition_number, partition_dofs, Preconditioner, SchwarzPreconditioner};
use crate::solver::{direct_solve, pcg, PcgReport};

/// Tensor evaluation grid; the mask defaults to half the mesh size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec3,
    pub hi: Vec3,
    pub counts: [usize; 3],
    pub mask: Option<f64>,
}

impl GridSpec {
    /// `[−half, half]²` with `n × n` points in the plane `z = 0`.
    pub fn square(half: f64, n: usize) -> Self {
        GridSpec { lo: [-half, -half, 0.0], hi: [half, half, 0.0], counts: [n, n, 1], mask: None }
    }

    pub fn build(&self, mesh: &SurfaceMesh) -> EvaluationGrid {
        let mask = self.mask.unwrap_or(0.5 * mesh.mesh_size());
        EvaluationGrid::cartesian(mesh, self.lo, self.hi, self.counts, mask)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Mesh file or builtin spec.
    pub geometry: String,
    /// Number of mesh levels; level `k` is the geometry refined `k` times.
    pub levels: usize,
    /// Refinement counts of the coarse meshes of the two-level method.
    pub coarse_levels: Vec<usize>,
    /// Grading exponent toward the screen tips (2D only).
    pub graded: Option<f64>,
    /// Constant field whose normal component is the Neumann data.
    pub g: Option<Vec<f64>>,
    pub grid: Option<GridSpec>,
    pub quadrature: QuadratureConfig,
    pub tol: f64,
    pub maxit: usize,
    /// Worker threads (0: all cores).
    pub threads: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            geometry: "plus".into(),
            levels: 1,
            coarse_levels: Vec::new(),
            graded: None,
            g: None,
            grid: None,
            quadrature: QuadratureConfig::default(),
            tol: 1e-8,
            maxit: 1000,
            threads: 0,
            seed: 0,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Defaults of the convergence study on the plus-shaped screen.
    pub fn experiment1() -> Self {
        ExperimentConfig {
            geometry: "plus:n=5".into(),
            levels: 5,
            graded: Some(2.0),
            grid: Some(GridSpec::square(2.0, 100)),
            ..Default::default()
        }
    }

    /// Defaults of the 2D conditioning study on the threefold junction.
    pub fn experiment2() -> Self {
        ExperimentConfig { geometry: "threefold".into(), levels: 7, coarse_levels: vec![2], ..Default::default() }
    }

    /// Defaults of the 3D conditioning study on the bow-tie.
    pub fn experiment3() -> Self {
        ExperimentConfig { geometry: "bowtie".into(), levels: 6, coarse_levels: vec![1], ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 1 {
            return Err(Error::InvalidArgument("levels must be at least 1".into()));
        }
        if let Some(&c) = self.coarse_levels.iter().find(|&&c| c >= self.levels) {
            return Err(Error::InvalidArgument(format!("coarse level {c} is not below levels = {}", self.levels)));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} outside (0, 1)", self.tol)));
        }
        if let Some(p) = self.graded {
            if !(p >= 1.0) {
                return Err(Error::InvalidArgument(format!("grading exponent {p} < 1")));
            }
        }
        if let Some(g) = &self.g {
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("g has non-finite entries".into()));
            }
        }
        self.quadrature.validate()
    }

    /// Compact JSON used as the provenance header of every output.
    pub fn header(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    fn base_mesh(&self) -> Result<SurfaceMesh> {
        resolve_geometry(&self.geometry)
    }

    fn g_vector(&self, dim: usize) -> Result<Vec3> {
        let g = match &self.g {
            Some(g) => g.clone(),
            None if dim == 2 => vec![1.0, 2.0],
            None => vec![1.0, 0.5, 0.25],
        };
        if g.len() != dim {
            return Err(Error::InvalidArgument(format!("g has {} components for a {dim}D geometry", g.len())));
        }
        let mut v = [0.0; 3];
        v[..dim].copy_from_slice(&g);
        Ok(v)
    }
}

/// `%.17e`-style value formatting.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text: config comment, header row and scientific-notation rows.
pub fn csv_text(config: &ExperimentConfig, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = format!("# {}\n{}\n", config.header(), header.join(","));
    for r in rows {
        s.push_str(&r.iter().map(|x| fmt_value(*x)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_file(dir, name, &s)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub config: ExperimentConfig,
    pub mesh: InflationSummary,
    pub mesh_size: f64,
    pub dofs: usize,
    pub preconditioner: String,
    pub pcg: PcgSummary,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PcgSummary {
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    /// Lanczos estimate from the CG coefficients (approximate).
    pub kappa_estimate_approx: f64,
}

impl From<&PcgReport> for PcgSummary {
    fn from(r: &PcgReport) -> Self {
        PcgSummary {
            iterations: r.iterations,
            converged: r.converged,
            residual_history: r.residual_history.clone(),
            kappa_estimate_approx: r.kappa_estimate,
        }
    }
}

/// Result of a screen solve on one mesh.
pub struct Solution {
    pub inflated: InflatedMesh,
    pub density: JumpVector,
    pub report: PcgReport,
    pub preconditioner: String,
}

/// The fine mesh of a config and, when it is nested, its coarse partner.
fn fine_mesh(config: &ExperimentConfig) -> Result<(SurfaceMesh, Option<crate::mesh::MeshLevelPair>)> {
    let base = config.base_mesh()?;
    let fine_level = config.levels - 1;
    let mut fine = refine_uniform_times(&base, fine_level).fine;
    if let Some(p) = config.graded {
        let corners: Vec<Vec3> = fine.boundary_vertices().iter().map(|&v| fine.vertex(v)).collect();
        fine = refine_graded(&fine, &corners, p)?;
        return Ok((fine, None));
    }
    let pair = match config.coarse_levels.first() {
        Some(&c) if c < fine_level => {
            let coarse = refine_uniform_times(&base, c).fine;
            Some(refine_uniform_times(&coarse, fine_level - c))
        }
        _ => None,
    };
    Ok((fine, pair))
}

/// Assembles and solves on the configured mesh with Neumann data `g·n`,
/// preconditioned by the two-level Schwarz method when a coarse level is
/// given.
pub fn solve(config: &ExperimentConfig) -> Result<Solution> {
    config.validate()?;
    let (fine, pair) = fine_mesh(config)?;
    let gv = config.g_vector(fine.dim())?;
    let inflated = inflate(&fine)?;
    let w = assemble_w(&inflated, &config.quadrature)?;
    let b = assemble_rhs(&inflated, &|_| gv, &config.quadrature)?;
    let schwarz = match &pair {
        Some(pair) => {
            let coarse = inflate(&pair.coarse)?;
            let r = build_prolongation(pair, &coarse, &inflated)?;
            let part = partition_dofs(pair, &inflated)?;
            Some(SchwarzPreconditioner::build(&w, &part, Some(&r))?)
        }
        None => None,
    };
    let prec = schwarz.as_ref().map(|p| p as &dyn Preconditioner);
    let report = pcg(&w, prec, &b, config.tol, config.maxit, None)?;
    if !report.converged {
        return Err(Error::NonFinite(format!(
            "PCG did not reach tolerance {} in {} iterations",
            config.tol, config.maxit
        )));
    }
    Ok(Solution {
        density: report.solution.clone(),
        inflated,
        report,
        preconditioner: if schwarz.is_some() { "two-level additive Schwarz" } else { "none" }.into(),
    })
}

/// Per generalized vertex: vertex, branch, coordinates and trace value.
pub fn density_rows(sol: &Solution) -> Result<Vec<Vec<f64>>> {
    let field = expand(&sol.density, &sol.inflated)?;
    let mesh = sol.inflated.base();
    Ok(sol
        .inflated
        .generalized_vertices()
        .iter()
        .zip(&field.values)
        .map(|(gv, &v)| {
            let p = mesh.vertex(gv.vertex);
            let mut row = vec![gv.vertex as f64, gv.branch as f64];
            row.extend_from_slice(&p[..mesh.dim()]);
            row.push(v);
            row
        })
        .collect())
}

fn coord_names(dim: usize) -> Vec<&'static str> {
    ["x", "y", "z"][..dim].to_vec()
}

/// Potential on a grid as CSV rows `x,y[,z],value`.
pub fn potential_rows(sol: &Solution, grid: &EvaluationGrid) -> Result<Vec<Vec<f64>>> {
    let dim = sol.inflated.dim();
    let values = eval_dl(&sol.density, &sol.inflated, grid)?;
    Ok(grid
        .points
        .iter()
        .zip(values)
        .map(|(p, v)| {
            let mut row = p[..dim].to_vec();
            row.push(v);
            row
        })
        .collect())
}

/// `solve`: density CSV, optional potential grid CSV and a JSON report.
pub fn cmd_solve(config: &ExperimentConfig) -> Result<SolveReport> {
    let sol = solve(config)?;
    let dim = sol.inflated.dim();
    let mut outputs = Vec::new();
    let mut header = vec!["vertex", "branch"];
    header.extend(coord_names(dim));
    header.push("value");
    let p = write_file(&config.out, "density.csv", &csv_text(config, &header, &density_rows(&sol)?))?;
    outputs.push(p.display().to_string());
    if let Some(spec) = &config.grid {
        let grid = spec.build(sol.inflated.base());
        let mut header = coord_names(dim);
        header.push("value");
        let rows = potential_rows(&sol, &grid)?;
        let p = write_file(&config.out, "potential.csv", &csv_text(config, &header, &rows))?;
        outputs.push(p.display().to_string());
    }
    let report = SolveReport {
        config: config.clone(),
        mesh: sol.inflated.summary(),
        mesh_size: sol.inflated.base().mesh_size(),
        dofs: sol.inflated.num_dofs(),
        preconditioner: sol.preconditioner.clone(),
        pcg: PcgSummary::from(&sol.report),
        outputs,
    };
    write_json(&config.out, "report.json", &report)?;
    Ok(report)
}

/// Writes `W` of the configured fine mesh as `W.bin` and `W.mtx`.
pub fn dump_matrix(config: &ExperimentConfig) -> Result<(PathBuf, PathBuf)> {
    config.validate()?;
    let (fine, _) = fine_mesh(config)?;
    let inflated = inflate(&fine)?;
    let w = assemble_w(&inflated, &config.quadrature)?;
    fs::create_dir_all(&config.out)?;
    let bin = config.out.join("W.bin");
    let mtx = config.out.join("W.mtx");
    let mut buf = Vec::new();
    assembly::write_matrix_binary(&w, &mut buf)?;
    fs::write(&bin, buf)?;
    let mut buf = format!("% {}\n", config.header()).into_bytes();
    assembly::write_matrix_market(&w, &mut buf)?;
    fs::write(&mtx, buf)?;
    Ok((bin, mtx))
}

/// `eval`: potential of the solved density on the configured grid; for
/// the plus/slit geometry the exact solution and error columns are added
/// and the Neumann data is taken from the exact solution.
pub fn cmd_eval(config: &ExperimentConfig, exact: bool) -> Result<PathBuf> {
    let spec = config.grid.clone().unwrap_or_else(|| GridSpec::square(2.0, 100));
    let dim;
    let rows = if exact {
        let mesh = exp1_mesh(config, config.levels - 1, config.graded)?;
        let (inflated, density) = solve_exact_plus(&mesh, &config.quadrature)?;
        dim = 2;
        let grid = spec.build(&mesh);
        let values = eval_dl(&density, &inflated, &grid)?;
        let exact = exact_plus_solution(&grid)?;
        grid.points
            .iter()
            .zip(values.iter().zip(&exact))
            .map(|(p, (v, e))| vec![p[0], p[1], *v, *e, v - e])
            .collect::<Vec<_>>()
    } else {
        let sol = solve(config)?;
        dim = sol.inflated.dim();
        potential_rows(&sol, &spec.build(sol.inflated.base()))?
    };
    let mut header = coord_names(dim);
    header.push("value");
    if exact {
        header.extend(["exact", "error"]);
    }
    write_file(&config.out, "eval.csv", &csv_text(config, &header, &rows))
}

// Convergence study

/// Neumann data of the exact slit solution for an oriented normal: the
/// analytic gradient evaluated just off the screen on the side of `n`.
pub fn exact_plus_neumann(x: Vec3, n: Vec3) -> f64 {
    let off = g::add(x, g::scale(n, 1e-9));
    exact_plus_gradient(off).map(|grad| g::dot(grad, n)).unwrap_or(f64::NAN)
}

fn exp1_mesh(config: &ExperimentConfig, level: usize, graded: Option<f64>) -> Result<SurfaceMesh> {
    let base = config.base_mesh()?;
    if base.dim() != 2 {
        return Err(Error::InvalidArgument("the convergence study needs a 2D geometry".into()));
    }
    let boundary = base.boundary_vertices();
    let tips = plus_tips(1.0);
    if boundary.len() != 4 || !tips.iter().all(|t| boundary.iter().any(|&v| g::dist(base.vertex(v), *t) < 1e-12)) {
        return Err(Error::InvalidArgument("the convergence study needs the plus screen with unit arms".into()));
    }
    let mesh = refine_uniform_times(&base, level).fine;
    match graded {
        Some(p) => refine_graded(&mesh, &tips, p),
        None => Ok(mesh),
    }
}

fn solve_exact_plus(mesh: &SurfaceMesh, quad: &QuadratureConfig) -> Result<(InflatedMesh, JumpVector)> {
    let inflated = inflate(mesh)?;
    let w = assemble_w(&inflated, quad)?;
    let b = assemble_rhs_neumann(&inflated, &exact_plus_neumann, quad)?;
    let x = direct_solve(&w, &b)?;
    Ok((inflated, x))
}

#[derive(Clone, Debug, Serialize)]
pub struct Exp1Result {
    pub config: ExperimentConfig,
    /// Nominal mesh size (arm length over segments per arm).
    pub h: Vec<f64>,
    pub dofs: Vec<usize>,
    pub error_uniform: Vec<f64>,
    pub error_graded: Vec<f64>,
    pub eoc_uniform: f64,
    pub eoc_graded: f64,
}

/// Grid error of the discrete potential against the exact solution on one mesh.
pub fn plus_grid_error(config: &ExperimentConfig, mesh: &SurfaceMesh, mask_h: f64) -> Result<(f64, usize)> {
    let (inflated, density) = solve_exact_plus(mesh, &config.quadrature)?;
    let mut spec = config.grid.clone().unwrap_or_else(|| GridSpec::square(2.0, 100));
    spec.mask = Some(spec.mask.unwrap_or(0.5 * mask_h));
    let grid = spec.build(mesh);
    let values = eval_dl(&density, &inflated, &grid)?;
    Ok((grid_error(&values, &exact_plus_solution(&grid)?)?, inflated.num_dofs()))
}

/// Uniform and graded meshes over all levels; writes `exp1.csv`,
/// `exp1.json` and `exp1.svg`.
pub fn cmd_experiment1(config: &ExperimentConfig) -> Result<Exp1Result> {
    config.validate()?;
    let p = config.graded.unwrap_or(2.0);
    let mut res = Exp1Result {
        config: config.clone(),
        h: Vec::new(),
        dofs: Vec::new(),
        error_uniform: Vec::new(),
        error_graded: Vec::new(),
        eoc_uniform: f64::NAN,
        eoc_graded: f64::NAN,
    };
    for level in 0..config.levels {
        let uniform = exp1_mesh(config, level, None)?;
        let h = uniform.mesh_size();
        let (eu, dofs) = plus_grid_error(config, &uniform, h)?;
        let graded = exp1_mesh(config, level, Some(p))?;
        let (eg, _) = plus_grid_error(config, &graded, h)?;
        res.h.push(h);
        res.dofs.push(dofs);
        res.error_uniform.push(eu);
        res.error_graded.push(eg);
    }
    if config.levels >= 2 {
        res.eoc_uniform = loglog_slope(&res.h, &res.error_uniform);
        res.eoc_graded = loglog_slope(&res.h, &res.error_graded);
    }
    let rows: Vec<Vec<f64>> =
        (0..res.h.len()).map(|k| vec![res.h[k], res.error_uniform[k], res.error_graded[k]]).collect();
    let csv = write_file(&config.out, "exp1.csv", &csv_text(config, &["h", "error_uniform", "error_graded"], &rows))?;
    write_json(&config.out, "exp1.json", &res)?;
    let spec = PlotSpec { title: Some("grid error vs h".into()), ..Default::default() };
    plot::emit_plot(&csv, &spec, &config.out.join("exp1.svg"))?;
    Ok(res)
}

// Conditioning studies

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CondRow {
    #[serde(rename = "H")]
    pub coarse_h: f64,
    pub h: f64,
    pub dofs: usize,
    pub kappa_unprec: f64,
    pub kappa_prec: f64,
    /// Extreme eigenvalues of the preconditioned operator.
    pub lambda_min: f64,
    pub lambda_max: f64,
}

pub const COND_HEADER: [&str; 7] = ["H", "h", "dofs", "kappa_unprec", "kappa_prec", "lambda_min", "lambda_max"];

impl CondRow {
    pub fn values(&self) -> Vec<f64> {
        vec![
            self.coarse_h,
            self.h,
            self.dofs as f64,
            self.kappa_unprec,
            self.kappa_prec,
            self.lambda_min,
            self.lambda_max,
        ]
    }
}

/// Condition numbers of `W` with and without the two-level preconditioner
/// for `coarse` refined `k` times.
pub fn cond_row(coarse: &SurfaceMesh, k: usize, quad: &QuadratureConfig) -> Result<CondRow> {
    let pair = refine_uniform_times(coarse, k);
    let fine = inflate(&pair.fine)?;
    let cinf = inflate(&pair.coarse)?;
    let w = assemble_w(&fine, quad)?;
    let unprec = condition_number(&w, None)?;
    let r = build_prolongation(&pair, &cinf, &fine)?;
    let part = partition_dofs(&pair, &fine)?;
    let prec = SchwarzPreconditioner::build(&w, &part, Some(&r))?;
    let s = condition_number(&w, Some(&prec))?;
    Ok(CondRow {
        coarse_h: pair.coarse_h,
        h: pair.fine_h,
        dofs: fine.num_dofs(),
        kappa_unprec: unprec.kappa,
        kappa_prec: s.kappa,
        lambda_min: s.lambda_min,
        lambda_max: s.lambda_max,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CondFit {
    pub coarse_level: usize,
    /// Slope of `log κ(W)` against `log h`.
    pub unprec_slope: f64,
    /// `max/min` of `κ_prec / (1 + log(H/h))²` over rows with `H/h ≥ 2`.
    pub polylog_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CondResult {
    pub config: ExperimentConfig,
    pub rows: Vec<CondRow>,
    pub fits: Vec<CondFit>,
}

pub fn fit_rows(coarse_level: usize, rows: &[CondRow]) -> CondFit {
    let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let ku: Vec<f64> = rows.iter().map(|r| r.kappa_unprec).collect();
    let scaled: Vec<f64> = rows
        .iter()
        .filter(|r| r.coarse_h / r.h > 1.5)
        .map(|r| r.kappa_prec / (1.0 + (r.coarse_h / r.h).ln()).powi(2))
        .collect();
    let ratio = if scaled.is_empty() {
        f64::NAN
    } else {
        scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    CondFit { coarse_level, unprec_slope: if rows.len() >= 2 { loglog_slope(&h, &ku) } else { f64::NAN }, polylog_ratio: ratio }
}

/// Sweeps fine levels `c..levels` for every coarse level `c`; writes
/// `<name>.csv`, `<name>.json` and `<name>.svg`.
pub fn cmd_cond(config: &ExperimentConfig, name: &str) -> Result<CondResult> {
    config.validate()?;
    let base = config.base_mesh()?;
    let coarse_levels = if config.coarse_levels.is_empty() { vec![0] } else { config.coarse_levels.clone() };
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &c in &coarse_levels {
        let coarse = refine_uniform_times(&base, c).fine;
        let mut block = Vec::new();
        for fine_level in c..config.levels {
            let row = cond_row(&coarse, fine_level - c, &config.quadrature)?;
            eprintln!(
                "{name}: H={:.4e} h={:.4e} dofs={} kappa={:.4e} kappa_prec={:.4e}",
                row.coarse_h, row.h, row.dofs, row.kappa_unprec, row.kappa_prec
            );
            block.push(row);
        }
        fits.push(fit_rows(c, &block));
        rows.extend(block);
    }
    let values: Vec<Vec<f64>> = rows.iter().map(CondRow::values).collect();
    let csv = write_file(&config.out, &format!("{name}.csv"), &csv_text(config, &COND_HEADER, &values))?;
    let res = CondResult { config: config.clone(), rows, fits };
    write_json(&config.out, &format!("{name}.json"), &res)?;
    let spec = PlotSpec {
        x: Some("h".into()),
        y: vec!["kappa_unprec".into(), "kappa_prec".into()],
        title: Some(format!("{name}: condition numbers")),
        ..Default::default()
    };
    plot::emit_plot(&csv, &spec, &config.out.join(format!("{name}.svg")))?;
    Ok(res)
}

pub fn cmd_experiment2(config: &ExperimentConfig) -> Result<CondResult> {
    if config.base_mesh()?.dim() != 2 {
        return Err(Error::InvalidArgument("experiment 2 needs a 2D geometry".into()));
    }
    cmd_cond(config, "exp2")
}

pub fn cmd_experiment3(config: &ExperimentConfig) -> Result<CondResult> {
    if config.base_mesh()?.dim() != 3 {
        return Err(Error::InvalidArgument("experiment 3 needs a 3D geometry".into()));
    }
    cmd_cond(config, "exp3")
}
