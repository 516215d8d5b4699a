mod commands;
mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "hgeom",
    version,
    about = "Hypersurface geometry on the Heisenberg group: identity checks, curvature oracles, and eta-curve flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check structural identities and closed-form oracles at seeded samples
    Verify(VerifyArgs),
    /// Integrate the reduced flow over phi0 values and compare the drop routes
    Sweep(SweepArgs),
    /// Integrate an eta-curve on a surface and export the trajectory
    Flow(FlowArgs),
    /// Tabulate computed sphere quantities against their closed forms
    SphereReport(SphereReportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// JSON config file (schema 1); flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sampling seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Worker threads, 0 = all cores (HGEOM_THREADS is the fallback)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct SurfaceArgs {
    /// Surface kind: gauge-ball, profile:gauge, profile:ellipsoid,
    /// profile:polynomial
    #[arg(long)]
    surface: Option<String>,
    /// Heisenberg dimension n
    #[arg(long)]
    n: Option<usize>,
    /// Gauge radius
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Vertical center offset
    #[arg(long)]
    t0: Option<f64>,
    /// Ellipsoid u^2 coefficient denominator
    #[arg(long)]
    a: Option<f64>,
    /// Ellipsoid t^2 coefficient denominator
    #[arg(long)]
    b: Option<f64>,
    /// Polynomial profile terms as JSON [[coeff, u_pow, t_pow], ...]
    #[arg(long)]
    terms: Option<String>,
    /// Interior t anchor for polynomial profiles
    #[arg(long)]
    interior_t: Option<f64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Number of seeded surface samples
    #[arg(long)]
    samples: Option<usize>,
    /// Finite-difference step for the derivative-limited checks
    #[arg(long)]
    fd_step: Option<f64>,
    /// Curvature prescription factor H = c |xi_H| (inferred for gauge balls)
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Heisenberg dimension n
    #[arg(long)]
    n: Option<usize>,
    /// Curvature prescription factor
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Comma-separated conserved-quantity values
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phi0: Option<Vec<f64>>,
    /// Cycles to integrate per positive phi0
    #[arg(long)]
    cycles: Option<usize>,
    /// Branch hint for negative phi0 (two-root regime)
    #[arg(long)]
    initial_radius: Option<f64>,
    /// Arclength budget
    #[arg(long)]
    max_s: Option<f64>,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    surface: SurfaceArgs,
    /// Start point as x1,..,xn,y1,..,yn,t
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    start: Option<Vec<f64>>,
    /// Arclength budget
    #[arg(long)]
    max_s: Option<f64>,
    /// Stop radius around the vertical axis (0 = automatic)
    #[arg(long)]
    pole_radius: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SphereReportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Heisenberg dimension n
    #[arg(long)]
    n: Option<usize>,
    /// Gauge radius
    #[arg(long = "R")]
    radius: Option<f64>,
    /// Vertical center offset
    #[arg(long)]
    t0: Option<f64>,
    /// Number of seeded sphere samples
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(hgeom_core::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<hgeom_core::Error> for CliError {
    fn from(e: hgeom_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Exit 2 for input and surface-definition problems, exit 1 for numerical
/// failures.
fn core_exit_code(err: &hgeom_core::Error) -> u8 {
    use hgeom_core::Error::*;
    match err {
        DimensionMismatch { .. }
        | UnsupportedDimension(_)
        | NonPositiveDilation(_)
        | DegenerateGradient(_)
        | OffSurface { .. }
        | CharacteristicPoint { .. }
        | Pole(_)
        | NonTangent(_)
        | AxisPoint(_)
        | BasisCompletion(_)
        | NoInteriorAnchor
        | SamplingFailure(_)
        | NoRoot { .. }
        | AmbiguousRoot
        | InvalidSpec(_) => 2,
        _ => 1,
    }
}

pub struct Resolved {
    pub seed: u64,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub pool: rayon::ThreadPool,
}

fn resolve_common(common: &CommonArgs, file: &config::FileConfig) -> Result<Resolved, CliError> {
    let seed = common.seed.or(file.seed).unwrap_or(0);
    let format = common.format.or(file.format).unwrap_or(OutputFormat::Csv);
    let output = common.output.clone().or_else(|| file.output.clone());
    let threads = match (common.threads, file.threads) {
        (Some(t), _) => t,
        (None, Some(t)) => t,
        (None, None) => match std::env::var("HGEOM_THREADS") {
            Ok(v) => v.parse::<usize>().map_err(|_| {
                CliError::Config(format!("HGEOM_THREADS is not a thread count: {v:?}"))
            })?,
            Err(_) => 0,
        },
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
    Ok(Resolved { seed, format, output, pool })
}

fn write_output(resolved: &Resolved, content: &str) -> Result<(), CliError> {
    match &resolved.output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (common, outcome) = match cli.command {
        Command::Verify(args) => {
            let file = config::load(args.common.config.as_deref()).map_err(CliError::Config)?;
            let resolved = resolve_common(&args.common, &file)?;
            let out = commands::cmd_verify(&args, &file, &resolved)?;
            (resolved, out)
        }
        Command::Sweep(args) => {
            let file = config::load(args.common.config.as_deref()).map_err(CliError::Config)?;
            let resolved = resolve_common(&args.common, &file)?;
            let out = commands::cmd_sweep(&args, &file, &resolved)?;
            (resolved, out)
        }
        Command::Flow(args) => {
            let file = config::load(args.common.config.as_deref()).map_err(CliError::Config)?;
            let resolved = resolve_common(&args.common, &file)?;
            let out = commands::cmd_flow(&args, &file, &resolved)?;
            (resolved, out)
        }
        Command::SphereReport(args) => {
            let file = config::load(args.common.config.as_deref()).map_err(CliError::Config)?;
            let resolved = resolve_common(&args.common, &file)?;
            let out = commands::cmd_sphere_report(&args, &file, &resolved)?;
            (resolved, out)
        }
    };
    write_output(&common, &outcome.content)?;
    if !outcome.pass {
        eprintln!("hgeom: thresholds exceeded, see report");
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("hgeom: {e}");
            ExitCode::from(e.code())
        }
    }
}
