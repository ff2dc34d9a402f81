mod commands;
mod config;
mod output;
mod repro;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shipwave::ErrorClass;
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SHIPWAVE_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "shipwave-cli", version, about = "Exponentially small ship waves: predictions, solvers and sweeps")]
struct Cli {
    /// Output directory for CSV, SVG and manifest files.
    #[arg(long, global = true, default_value = "shipwave-out")]
    out: PathBuf,
    /// Worker threads for sweeps (defaults to $SHIPWAVE_WORKERS, then all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Also render SVG charts where a command has one.
    #[arg(long, global = true)]
    svg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace every Stokes line of a hull and classify its corners.
    TraceStokes {
        hull: PathBuf,
    },
    /// Per-corner asymptotic wave amplitudes and their downstream sum.
    Predict {
        hull: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value = "simplified")]
        model: ModelArg,
        /// Also print the dominance report.
        #[arg(long)]
        dominance: bool,
    },
    /// Late-order prefactor and exponent over a range of corner angles.
    OmegaTable {
        #[arg(long, default_value_t = 0.1)]
        sigma_min: f64,
        #[arg(long, default_value_t = 0.9)]
        sigma_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value = "1e-10")]
        tol: f64,
    },
    /// Integrate the simplified nonlinear model and measure its waves.
    SolveSimplified {
        hull: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        phi_max: Option<f64>,
        #[arg(long, default_value = "1e-12")]
        tol: f64,
        /// Write the sampled profile `phi,q,re_u,im_u` to this file.
        #[arg(long)]
        dump_profile: Option<PathBuf>,
    },
    /// Solve the full boundary-integral problem by collocation.
    SolveFull {
        hull: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.015)]
        dphi: f64,
        #[arg(long, default_value = "1e-11")]
        newton_tol: f64,
        /// Seed Newton from a profile written by `--dump-profile`.
        #[arg(long)]
        continue_from: Option<PathBuf>,
        /// Write the profile `phi,q,theta` to this file.
        #[arg(long)]
        dump_profile: Option<PathBuf>,
    },
    /// Sweep the upstream corner position of a two-corner hull.
    SweepCorner(SweepCornerArgs),
    /// Sweep eps on one hull and fit the exponential law.
    SweepEpsilon {
        hull: PathBuf,
        /// Comma-separated values of eps.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        phi_max: Option<f64>,
        #[arg(long, default_value = "1e-12")]
        tol: f64,
    },
    /// Canned reproduction recipes.
    Repro {
        figure: Figure,
    },
}

#[derive(Debug, Args)]
pub struct SweepCornerArgs {
    #[arg(long, default_value = "1/4", value_parser = parse_sigma)]
    pub sigma1: f64,
    #[arg(long, default_value = "1/4", value_parser = parse_sigma)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0.51)]
    pub a1_min: f64,
    #[arg(long, default_value_t = 0.99)]
    pub a1_max: f64,
    #[arg(long, default_value_t = 0.02)]
    pub step: f64,
    #[arg(long, default_value_t = 0.15)]
    pub eps: f64,
    #[arg(long)]
    pub phi_max: Option<f64>,
    #[arg(long, default_value = "1e-12")]
    pub tol: f64,
}

fn parse_sigma(s: &str) -> Result<f64, String> {
    config::parse_angle(s).map(|a| a.value())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Full,
    Simplified,
}

impl From<ModelArg> for shipwave::wave::Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Full => shipwave::wave::Model::Full,
            ModelArg::Simplified => shipwave::wave::Model::Simplified,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] config::ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] shipwave::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Measurement => 4,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => "input",
                ErrorClass::Numerical => "numerical",
                ErrorClass::Measurement => "measurement",
            },
        }
    }

    fn diagnostic(&self) -> String {
        let mut v = serde_json::json!({ "error": self.kind(), "exit": self.exit_code(), "message": self.to_string() });
        if let CliError::Config(c) = self {
            v["file"] = c.path.display().to_string().into();
            v["line"] = c.line.into();
            v["column"] = c.column.into();
        }
        v.to_string()
    }
}

fn workers(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = workers(cli.workers)? {
        if n == 0 {
            return Err(CliError::Usage("worker count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let ctx = commands::Context { out: cli.out, svg: cli.svg, command_line: std::env::args().collect::<Vec<_>>().join(" ") };
    match cli.command {
        Command::TraceStokes { hull } => commands::trace_stokes(&ctx, &hull),
        Command::Predict { hull, eps, model, dominance } => commands::predict(&ctx, &hull, eps, model.into(), dominance),
        Command::OmegaTable { sigma_min, sigma_max, step, tol } => commands::omega_table(&ctx, sigma_min, sigma_max, step, tol),
        Command::SolveSimplified { hull, eps, phi_max, tol, dump_profile } => {
            commands::solve_simplified(&ctx, &hull, eps, phi_max, tol, dump_profile.as_deref())
        }
        Command::SolveFull { hull, eps, n, dphi, newton_tol, continue_from, dump_profile } => commands::solve_full(
            &ctx,
            &hull,
            eps,
            n,
            dphi,
            newton_tol,
            continue_from.as_deref(),
            dump_profile.as_deref(),
        ),
        Command::SweepCorner(args) => commands::sweep_corner(&ctx, &args),
        Command::SweepEpsilon { hull, eps, phi_max, tol } => commands::sweep_epsilon(&ctx, &hull, &eps, phi_max, tol),
        Command::Repro { figure } => repro::run(&ctx, figure),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code())
        }
    }
}
