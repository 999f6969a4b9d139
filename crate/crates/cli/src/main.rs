mod post;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use semflow::flow_solver::{load_discretization, run_case, CaseConfig};
use semflow::mesh::BoundaryTag;
use semflow::verify::{run_suite, SUITES};
use semflow::Error;

/// Overrides every output directory (run artifacts, post products, verify scratch).
const OUTPUT_ENV: &str = "SEMFLOW_OUTPUT_DIR";

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_DIVERGENCE: u8 = 4;
const EXIT_SOLVER: u8 = 5;

#[derive(Parser)]
#[command(name = "semflow", version, about = "2D spectral-element incompressible flow solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the case described by a TOML configuration file.
    Run { config: PathBuf },
    /// Run a built-in verification suite.
    Verify {
        suite: String,
        /// Allow the long-running suites.
        #[arg(long)]
        extended: bool,
    },
    /// Post-process time series (CSV with a `t` column).
    Post(post::PostArgs),
    /// Load the mesh of a case and print its statistics.
    MeshInfo { config: PathBuf },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::MissingKeys(_) | Error::Parameter(_) => EXIT_USAGE,
        Error::Configuration(_)
        | Error::Parse { .. }
        | Error::Geometry(_)
        | Error::Spline(_)
        | Error::Io { .. }
        | Error::Serde(_) => EXIT_CONFIG,
        Error::Divergence { .. } | Error::Domain(_) => EXIT_DIVERGENCE,
        Error::Breakdown { .. } | Error::SolveFailed { .. } => EXIT_SOLVER,
    }
}

fn output_override() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn cmd_run(config: &Path) -> semflow::Result<u8> {
    let cfg = CaseConfig::load(config)?;
    let out = output_override();
    let art = run_case(&cfg, out.as_deref())?;
    let s = &art.summary;
    println!("case {} ({}) finished: {} steps, t = {:.6}", s.case, s.model, s.steps, s.t);
    println!("cl = {:.6}  cd = {:.6}", s.cl, s.cd);
    println!("max divergence residual = {:.3e}", s.max_divergence_residual);
    println!("artifacts in {}", art.directory.display());
    println!("wall time {:.2} s", s.wall_seconds);
    Ok(0)
}

fn cmd_verify(suite: &str, extended: bool) -> semflow::Result<u8> {
    let work = output_override().unwrap_or_else(|| PathBuf::from("semflow-verify")).join(suite);
    let report = run_suite(suite, extended, &work)?;
    println!("{report}");
    Ok(if report.overall { 0 } else { EXIT_CHECKS_FAILED })
}

fn cmd_mesh_info(config: &Path) -> semflow::Result<u8> {
    let cfg = CaseConfig::load(config)?;
    let disc = load_discretization(&cfg)?;
    let m = &disc.mesh;
    println!("mesh {}", cfg.mesh.path.display());
    println!("elements {}  order {}", m.num_elements(), m.order());
    println!("vertices {}  global nodes {}", m.num_vertices(), m.num_global());
    for tag in [
        BoundaryTag::Wall,
        BoundaryTag::InflowOutflow,
        BoundaryTag::Inflow,
        BoundaryTag::Outflow,
        BoundaryTag::Symmetry,
    ] {
        let n = m.faces_with_tag(tag).count();
        if n > 0 {
            println!("{tag} faces {n}");
        }
    }
    println!("jacobian min {:.6e}  max {:.6e}", disc.geom.min_jacobian(), disc.geom.max_jacobian());
    println!("area {:.6e}", disc.geom.area());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config } => cmd_run(config),
        Command::Verify { suite, extended } => {
            if !SUITES.contains(&suite.as_str()) {
                eprintln!("error: unknown suite '{suite}'; available: {}", SUITES.join(", "));
                return ExitCode::from(EXIT_USAGE);
            }
            cmd_verify(suite, *extended)
        }
        Command::Post(args) => post::run(args, output_override()),
        Command::MeshInfo { config } => cmd_mesh_info(config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
