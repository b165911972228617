//! Command-line front end: `lhv verify | simulate | analyze | scan`.
//!
//! Exit codes: 0 on success, 1 on a runtime failure (including failed
//! checks), 2 on a configuration or usage error.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::Error;
pub use config::{ConfigFile, Format, Overrides, RunConfig, THREADS_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lhv", version, about = "Local hidden variables model for entangled B0/B0bar pairs")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Mean lifetime.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Mass difference (oscillation frequency).
    #[arg(long = "delta-m", global = true)]
    delta_m: Option<f64>,
    /// Mixing parameter x = delta_m * tau, with tau = 1.
    #[arg(long, global = true)]
    x: Option<f64>,
    /// Number of pairs to generate.
    #[arg(long, global = true)]
    events: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Assign the two laws to the sides by a fair coin per event.
    #[arg(long, global = true)]
    symmetrized: bool,
    /// Number of uniform |t1 - t2| bins.
    #[arg(long, global = true)]
    bins: Option<usize>,
    /// Upper edge of the binned |t1 - t2| range (default 5 tau).
    #[arg(long = "dt-max", global = true)]
    dt_max: Option<f64>,
    /// Explicit comma-separated bin edges; the last may be `inf`.
    #[arg(long, global = true)]
    edges: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated list of table, tree, csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Worker threads (default: $LHV_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Config file with [model], [sim], [binning], [verify], [output], [run], [scan] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Upper end of the verification grid on each axis (default 5 tau).
    #[arg(long = "t-max", global = true)]
    t_max: Option<f64>,
    /// Verification grid points per axis.
    #[arg(long, global = true)]
    points: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quadrature verification of the model against the quantum predictions.
    Verify,
    /// Generate events and write them with a run manifest.
    Simulate,
    /// Bin and fit an event file.
    Analyze {
        /// Event file written by `simulate`.
        event_file: PathBuf,
    },
    /// Verify, simulate and fit at several mixing parameters.
    Scan {
        /// Comma-separated mixing parameters.
        #[arg(long = "x-values")]
        x_values: Option<String>,
    },
}

/// Failure classified by exit code.
#[derive(Debug)]
pub(crate) enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Runtime(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Binning(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn overrides(g: GlobalArgs, x_values: Option<String>) -> Overrides {
    Overrides {
        tau: g.tau,
        delta_m: g.delta_m,
        x: g.x,
        events: g.events,
        seed: g.seed,
        symmetrized: g.symmetrized,
        bins: g.bins,
        dt_max: g.dt_max,
        edges: g.edges,
        out: g.out,
        format: g.format,
        threads: g.threads,
        t_max: g.t_max,
        points: g.points,
        x_values,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("lhv: {}", f.message());
            f.code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Failure> {
    let file = match &cli.global.config {
        Some(path) => ConfigFile::load(path).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?,
        None => ConfigFile::default(),
    };
    let (model_given, x_values) = match &cli.command {
        Command::Scan { x_values } => (false, x_values.clone()),
        _ => (cli.global.tau.is_some() || cli.global.delta_m.is_some() || cli.global.x.is_some(), None),
    };
    let overrides = overrides(cli.global, x_values);
    let cfg = RunConfig::resolve(&file, &overrides)?;
    with_pool(cfg.threads, || match &cli.command {
        Command::Verify => commands::verify(&cfg),
        Command::Simulate => commands::simulate(&cfg),
        Command::Analyze { event_file } => commands::analyze(&cfg, event_file, model_given),
        Command::Scan { .. } => commands::scan(&cfg),
    })
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<R, Failure> + Send) -> Result<R, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Runtime(format!("thread pool: {e}")))?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_threads: Option<usize>, f: impl FnOnce() -> Result<R, Failure> + Send) -> Result<R, Failure> {
    f()
}
