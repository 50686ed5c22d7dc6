//! `htheory` command-line front end.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use htheory::ModelClass;

use failure::{ExitKind, Failure};

/// Fixed default seed so that repeated runs agree.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "htheory",
    version,
    about = "Hierarchical heavy-tailed models: simulate, evaluate, fit"
)]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "HTHEORY_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate price panels from the matrix hierarchy, or SDE background paths.
    Simulate(SimulateArgs),
    /// Tabulate a model density on a grid.
    Eval(EvalArgs),
    /// Fit both model classes to a price file.
    Fit(FitArgs),
    /// Print a saved fit report as a table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    /// Matrix chain and Gaussian returns, written as a price CSV.
    Matrix,
    /// Scalar SDE hierarchy, written as `t,eps_1,…`.
    Sde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Density {
    Signal,
    Background,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_parser = parse_class)]
    pub class: ModelClass,
    /// Number of levels N; defaults to the number of β values given.
    #[arg(long)]
    pub levels: Option<usize>,
    /// One β for all levels, or a comma-separated list.
    #[arg(long, value_delimiter = ',', required = true)]
    pub beta: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub eps0: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = SimKind::Matrix)]
    pub kind: SimKind,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of assets (matrix kind).
    #[arg(long, default_value_t = 10)]
    pub assets: usize,
    /// Time steps to record.
    #[arg(long)]
    pub steps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Block length of the fastest level (matrix kind).
    #[arg(long, default_value_t = htheory::pipeline::DEFAULT_FAST_BLOCK)]
    pub fast_block: usize,
    /// Ratio between block lengths of consecutive levels (matrix kind).
    #[arg(long, default_value_t = htheory::pipeline::DEFAULT_BLOCK_RATIO)]
    pub block_ratio: usize,
    /// Scale of the simulated log returns (matrix kind).
    #[arg(long, default_value_t = 0.01)]
    pub daily_vol: f64,
    /// Relaxation rate of the fastest level (sde kind).
    #[arg(long, default_value_t = 1.0)]
    pub gamma1: f64,
    /// Ratio between rates of consecutive levels (sde kind).
    #[arg(long, default_value_t = 10.0)]
    pub gamma_ratio: f64,
    /// Integration step (sde kind); defaults to 1e-3 over the fastest rate.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Keep every k-th step (sde kind).
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Output file; standard output if absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `lo:hi:count`, evenly spaced.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Grid,
    #[arg(long, value_enum, default_value_t = Density::Signal)]
    pub density: Density,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Long-format `date,ticker,close` CSV.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Directory for `report.json` and the density CSVs.
    #[arg(long, short)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub max_levels: usize,
    #[arg(long, default_value_t = 1.0)]
    pub eps0: f64,
    /// Use this window instead of searching for the optimal one.
    #[arg(long, conflicts_with_all = ["l_min", "l_max"])]
    pub window: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub l_min: usize,
    #[arg(long, default_value_t = 60)]
    pub l_max: usize,
    /// Stride between windows.
    #[arg(long, default_value_t = 1)]
    pub step: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A `report.json` written by `fit`.
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.lo + h * k as f64).collect()
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err("expected lo:hi:count".into());
    };
    let lo: f64 = lo.trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("hi: {e}"))?;
    let count: usize = count.trim().parse().map_err(|e| format!("count: {e}"))?;
    if !lo.is_finite() || !hi.is_finite() {
        return Err("bounds must be finite".into());
    }
    match count {
        0 => Err("count must be positive".into()),
        1 if lo != hi => Err("a single point needs lo == hi".into()),
        c if c > 1 && lo >= hi => Err("need lo < hi".into()),
        _ => Ok(Grid { lo, hi, count }),
    }
}

fn parse_class(s: &str) -> Result<ModelClass, String> {
    s.parse().map_err(|e: htheory::DistError| e.to_string())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::numerical)?;
    }
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Report(a) => commands::report(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(ExitKind::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.kind as u8)
        }
    }
}
