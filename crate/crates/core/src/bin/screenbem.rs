use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use screenbem_core::experiments::{self, ExperimentConfig, GridSpec, COND_HEADER};
use screenbem_core::mesh::{refine_uniform_times, resolve_geometry};
use screenbem_core::multiscreen::inflate;
use screenbem_core::plot::{emit_plot, PlotSpec};
use screenbem_core::{Error, Result};

/// Galerkin boundary elements for Laplace screen problems on multi-screens.
#[derive(Parser)]
#[command(name = "screenbem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Neumann screen problem and write density, potential and report.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also write the Galerkin matrix as W.bin and W.mtx.
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Print the branch-count histogram and jump DOF count as JSON.
    Inflate {
        /// Mesh file or builtin spec (same as --geometry).
        mesh: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Condition numbers with and without the two-level preconditioner.
    Cond {
        #[command(flatten)]
        common: Common,
    },
    /// Convergence study on the plus-shaped screen.
    Exp1 {
        #[command(flatten)]
        common: Common,
    },
    /// Conditioning study on the threefold junction (2D).
    Exp2 {
        #[command(flatten)]
        common: Common,
    },
    /// Conditioning study on the bow-tie (3D).
    Exp3 {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the potential of the solved density on a grid.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Use the exact slit solution as data and add exact/error columns.
        #[arg(long)]
        exact: bool,
    },
    /// Render a CSV file as a log-scale SVG line plot.
    Plot {
        csv: PathBuf,
        /// Abscissa column (default: first column).
        #[arg(long)]
        x: Option<String>,
        /// Comma-separated ordinate columns (default: all others).
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        /// Output SVG path (default: the CSV path with extension .svg).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Linear instead of logarithmic axes.
        #[arg(long)]
        linear: bool,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Mesh file or builtin spec such as `plus`, `threefold:n=2`, `bowtie:side=2`.
    #[arg(long)]
    geometry: Option<String>,
    /// Number of mesh levels (level k is the geometry refined k times).
    #[arg(long)]
    levels: Option<usize>,
    /// Comma-separated refinement counts of the coarse meshes.
    #[arg(long, value_delimiter = ',')]
    coarse_levels: Option<Vec<usize>>,
    /// Grade the mesh toward the screen tips with this exponent (2D).
    #[arg(long)]
    graded: Option<f64>,
    /// Constant field g as comma-separated components; data is g·n.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    g: Option<Vec<f64>>,
    /// Relative PCG tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    maxit: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Gauss points per direction for far pairs.
    #[arg(long)]
    quad_far: Option<usize>,
    /// Gauss points per direction for singular pairs.
    #[arg(long)]
    quad_sing: Option<usize>,
    /// Square evaluation grid `half,n` in the plane z = 0.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn apply(&self, mut c: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(v) = &self.geometry {
            c.geometry = v.clone();
        }
        if let Some(v) = self.levels {
            c.levels = v;
        }
        if let Some(v) = &self.coarse_levels {
            c.coarse_levels = v.clone();
        }
        if self.graded.is_some() {
            c.graded = self.graded;
        }
        if self.g.is_some() {
            c.g = self.g.clone();
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.maxit {
            c.maxit = v;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.threads {
            c.threads = v;
        }
        if let Some(v) = self.quad_far {
            c.quadrature.far_order = v;
        }
        if let Some(v) = self.quad_sing {
            c.quadrature.singular_order = v;
        }
        if let Some(v) = &self.grid {
            match v.as_slice() {
                [half, n] if *half > 0.0 && *n >= 1.0 && n.fract() == 0.0 => {
                    c.grid = Some(GridSpec::square(*half, *n as usize));
                }
                _ => return Err(Error::InvalidArgument("--grid expects `half,n`".into())),
            }
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn init_threads(n: usize) -> Result<()> {
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let start = Instant::now();
    match cli.command {
        Command::Solve { common, dump_matrix } => {
            let c = common.apply(ExperimentConfig::default())?;
            init_threads(c.threads)?;
            if dump_matrix {
                let (bin, mtx) = experiments::dump_matrix(&c)?;
                eprintln!("wrote {} and {}", bin.display(), mtx.display());
            }
            let report = experiments::cmd_solve(&c)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Inflate { mesh, common } => {
            let mut c = common.apply(ExperimentConfig::default())?;
            if let Some(m) = mesh {
                c.geometry = m;
            }
            let base = resolve_geometry(&c.geometry)?;
            let inf = inflate(&refine_uniform_times(&base, c.levels - 1).fine)?;
            println!("{}", serde_json::to_string_pretty(&inf.summary())?);
        }
        Command::Cond { common } => {
            let c = common.apply(ExperimentConfig { coarse_levels: vec![0], ..Default::default() })?;
            init_threads(c.threads)?;
            let res = experiments::cmd_cond(&c, "cond")?;
            let rows: Vec<Vec<f64>> = res.rows.iter().map(|r| r.values()).collect();
            print!("{}", experiments::csv_text(&c, &COND_HEADER, &rows));
        }
        Command::Exp1 { common } => {
            let c = common.apply(ExperimentConfig::experiment1())?;
            init_threads(c.threads)?;
            let res = experiments::cmd_experiment1(&c)?;
            println!("eoc_uniform = {:.4}", res.eoc_uniform);
            println!("eoc_graded = {:.4}", res.eoc_graded);
        }
        Command::Exp2 { common } => {
            let c = common.apply(ExperimentConfig::experiment2())?;
            init_threads(c.threads)?;
            print_fits(&experiments::cmd_experiment2(&c)?);
        }
        Command::Exp3 { common } => {
            let c = common.apply(ExperimentConfig::experiment3())?;
            init_threads(c.threads)?;
            print_fits(&experiments::cmd_experiment3(&c)?);
        }
        Command::Eval { common, exact } => {
            let defaults = if exact {
                ExperimentConfig { graded: None, levels: 1, ..ExperimentConfig::experiment1() }
            } else {
                ExperimentConfig::default()
            };
            let c = common.apply(defaults)?;
            init_threads(c.threads)?;
            let path = experiments::cmd_eval(&c, exact)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Plot { csv, x, y, out, linear } => {
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            let spec = PlotSpec { x, y, title: None, log_x: !linear, log_y: !linear };
            emit_plot(&csv, &spec, &out)?;
            eprintln!("wrote {}", out.display());
        }
    }
    eprintln!("elapsed {:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn print_fits(res: &experiments::CondResult) {
    for f in &res.fits {
        println!(
            "coarse level {}: unpreconditioned slope = {:.4}, polylog ratio = {:.4}",
            f.coarse_level, f.unprec_slope, f.polylog_ratio
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
