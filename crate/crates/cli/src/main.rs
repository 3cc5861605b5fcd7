use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use gradmap_cli::output::{report_bytes, resolve_output, write_output};
use gradmap_cli::scenario::parse_vector;
use gradmap_cli::schema::parse_model;
use gradmap_cli::{load_measure, load_scenario, run_scenario, CliError, Command, Params, Scenario};

/// Output directory override for reports and tables.
const OUT_DIR_ENV: &str = "GRADMAP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "gradmap", version, about = "Gradient maps of measures on RP^n and CP^n")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,

    #[arg(long, global = true, default_value_t = 500)]
    max_iter: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Diagonal target, e.g. "[0.1,0,-0.1]"; entries must sum to 0.
    #[arg(long, global = true, allow_hyphen_values = true)]
    target: Option<String>,

    /// Sample count for orbit-image and reduce.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Radius of the torus directions sampled by orbit-image.
    #[arg(long, global = true, default_value_t = 3.0)]
    radius: f64,

    /// Model such as rp2 or cp1, for commands that need no measure.
    #[arg(long, global = true)]
    model: Option<String>,

    /// Output file; standard output when absent and GRADMAP_OUT_DIR is unset.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Record the wall time in the report (reports are then not reproducible).
    #[arg(long, global = true)]
    wall_time: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Gradient map of a measure and its torus part.
    Compute { measure: PathBuf },
    /// Find g with F(g·ν) = target (diag of --target, default 0).
    Balance {
        measure: PathBuf,
        /// Use the diagonal torus only.
        #[arg(long)]
        torus: bool,
    },
    /// Sample the torus orbit image of a measure.
    OrbitImage { measure: PathBuf },
    /// Momentum polytope of a model, with the measure's torus gradient if given.
    Polytope { measure: Option<PathBuf> },
    /// Affine-hull reduction and recentering of the sampled image.
    Reduce { measure: PathBuf },
    /// Randomized invariant self-checks.
    Check { measure: Option<PathBuf> },
    /// Run a JSON scenario file; --output, --format and --wall-time still apply.
    Run { scenario: PathBuf },
}

fn build_scenario(cli: &Cli) -> Result<Scenario, CliError> {
    let load = |p: &Option<PathBuf>| p.as_deref().map(load_measure).transpose();
    let (command, measure, torus) = match &cli.command {
        Sub::Run { scenario } => {
            let mut s = load_scenario(scenario)?;
            s.params.wall_time |= cli.wall_time;
            return Ok(s);
        }
        Sub::Compute { measure } => (Command::Compute, Some(load_measure(measure)?), false),
        Sub::Balance { measure, torus } => (Command::Balance, Some(load_measure(measure)?), *torus),
        Sub::OrbitImage { measure } => (Command::OrbitImage, Some(load_measure(measure)?), false),
        Sub::Polytope { measure } => (Command::Polytope, load(measure)?, false),
        Sub::Reduce { measure } => (Command::Reduce, Some(load_measure(measure)?), false),
        Sub::Check { measure } => (Command::Check, load(measure)?, false),
    };
    let params = Params {
        tol: cli.tol,
        max_iter: cli.max_iter,
        seed: cli.seed,
        samples: cli.samples,
        target: cli.target.as_deref().map(parse_vector).transpose()?,
        torus,
        radius: cli.radius,
        wall_time: cli.wall_time,
    };
    let model = cli.model.as_deref().map(parse_model).transpose()?;
    Ok(Scenario { command, model, measure, params })
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let scenario = build_scenario(cli)?;
    let out = run_scenario(&scenario)?;
    let (bytes, ext) = match cli.format {
        Format::Json => (report_bytes(&out.report)?, "json"),
        Format::Csv => (out.table.to_bytes()?, "csv"),
    };
    let out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let default_name = format!("{}.{ext}", scenario.command.name());
    let target = resolve_output(cli.output.as_deref(), out_dir.as_deref(), &default_name);
    write_output(target.as_deref(), &bytes)
        .with_context(|| format!("writing {}", target.as_deref().unwrap_or(Path::new("<stdout>")).display()))?;
    if !out.success {
        log::warn!("{}: {}", scenario.command.name(), out.report.status);
    }
    Ok(out.success)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
