mod commands;
mod manifest;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use curvecross::Distribution;

#[derive(Parser)]
#[command(
    name = "curvecross",
    version,
    about = "Average intersection numbers of random trigonometric plane curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact mean intersection number as a reduced fraction.
    Exact(ExactArgs),
    /// Monte Carlo estimate of the mean intersection number.
    Simulate(SimulateArgs),
    /// Check every step of the closed-form derivation numerically.
    Verify(VerifyArgs),
    /// Count the intersections of two curve files.
    Count(CountArgs),
    /// Draw curves uniformly from the unit ball and write them as JSON.
    Sample(SampleArgs),
}

#[derive(Args)]
pub struct ExactArgs {
    /// Degree.
    #[arg(long = "N", conflicts_with_all = ["sweep", "limit"])]
    pub n: Option<u64>,
    /// Sobolev order (0 is the L2 metric).
    #[arg(long, default_value_t = 0)]
    pub r: u32,
    /// Inclusive degree range `A..B`, written as CSV.
    #[arg(long, value_parser = parse_range, conflicts_with = "limit")]
    pub sweep: Option<DegreeRange>,
    /// Comma-separated degrees for the large-N limit report (r >= 1).
    #[arg(long, value_delimiter = ',')]
    pub limit: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub r: u32,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads. Results do not depend on this.
    #[arg(long, env = "CURVECROSS_THREADS", default_value_t = 1)]
    pub workers: usize,
    /// `uniform` or `maxnorm:<k>`.
    #[arg(long, default_value = "uniform", value_parser = parse_distribution)]
    pub distribution: Distribution,
    #[command(flatten)]
    pub counting: CountingArgs,
    /// Summary JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-sample CSV path.
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct CountingArgs {
    /// Target polyline chord length.
    #[arg(long)]
    pub seg_target: Option<f64>,
    /// Newton step tolerance.
    #[arg(long)]
    pub newton_tol: Option<f64>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Degree or inclusive range `A..B` (each in 1..=8).
    #[arg(long = "N", default_value = "1..3", value_parser = parse_range)]
    pub n: DegreeRange,
    /// Rejection attempts for the fiber step; 0 skips it.
    #[arg(long, default_value_t = 200_000)]
    pub fiber_attempts: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    pub format: ReportFormat,
    /// Report JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CountArgs {
    pub f: PathBuf,
    pub g: PathBuf,
    #[command(flatten)]
    pub counting: CountingArgs,
    /// Also run the brute-force oracle with this many vertices (>= 256).
    #[arg(long)]
    pub oracle: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SampleArgs {
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub r: u32,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, default_value = "curves")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeRange {
    pub from: usize,
    pub to: usize,
}

fn parse_range(s: &str) -> Result<DegreeRange, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("not a degree: {t:?}"))
    };
    let (from, to) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let n = num(s)?;
            (n, n)
        }
    };
    if from > to {
        return Err(format!("empty range {s}"));
    }
    Ok(DegreeRange { from, to })
}

fn parse_distribution(s: &str) -> Result<Distribution, String> {
    s.parse().map_err(|e: curvecross::Error| e.to_string())
}

/// A failed run, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Tolerance(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Tolerance(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Tolerance(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout and are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Exact(a) => commands::exact(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
        Command::Count(a) => commands::count(a),
        Command::Sample(a) => commands::sample(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
