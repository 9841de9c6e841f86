//! `gave`: benchmark, solve and verify generalized absolute value equations.

mod commands;
mod parallel;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gave_core::{GammaRule, SolverConfig};
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const NOT_CONVERGED: u8 = 2;
    pub const INPUT: u8 = 3;
    pub const INVARIANT: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Io(_) => exit::INPUT,
            CliError::Invariant(_) => exit::INVARIANT,
        }
    }
}

pub fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "gave", version, about = "Smoothing Newton solver for A x + B|x| = b")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the benchmark families and print an iteration/time table.
    Bench(BenchArgs),
    /// Solve one problem.
    Solve(SolveArgs),
    /// Run the solvability checks on one problem.
    Verify(VerifyArgs),
    /// Compare the solver with the sign-enumeration oracle on random instances.
    OracleCompare(OracleArgs),
    /// Write a generated problem in the text format.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Md,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaArg {
    Paper,
    Value(f64),
}

fn parse_gamma(s: &str) -> Result<GammaArg, String> {
    if s.eq_ignore_ascii_case("paper") {
        return Ok(GammaArg::Paper);
    }
    s.parse::<f64>()
        .map(GammaArg::Value)
        .map_err(|_| format!("expected `paper` or a number, got `{s}`"))
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Stop once the residual ‖A x + B|x| - b‖ is at most this.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Full-step contraction factor.
    #[arg(long, default_value_t = 0.2)]
    pub theta: f64,
    /// Backtracking factor.
    #[arg(long, default_value_t = 0.8)]
    pub delta: f64,
    /// Initial smoothing parameter.
    #[arg(long, default_value_t = 0.01)]
    pub mu0: f64,
    /// Line-search constant: a number in (0, 1) or `paper` for the default rule.
    #[arg(long, default_value = "paper", value_parser = parse_gamma)]
    pub gamma: GammaArg,
    #[arg(long, default_value_t = 50)]
    pub max_backtracks: usize,
    /// Compare against the current merit instead of the running average.
    #[arg(long)]
    pub monotone: bool,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            theta: self.theta,
            delta: self.delta,
            mu0: self.mu0,
            gamma: match self.gamma {
                GammaArg::Paper => GammaRule::Reference,
                GammaArg::Value(g) => GammaRule::Fixed(g),
            },
            tol: self.tol,
            max_iter: self.max_iter,
            max_backtracks: self.max_backtracks,
            monotone: self.monotone,
        }
    }
}

/// Where a single problem comes from: a file, a benchmark family, or the
/// random generator.
#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Problem file (`gave <n>` or `hlcp <n>` header).
    #[arg(conflicts_with_all = ["example", "random_n"])]
    pub file: Option<PathBuf>,
    /// Benchmark family (1 or 2).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), conflicts_with = "random_n")]
    pub example: Option<u8>,
    /// Block dimension of the benchmark family (n = m^2).
    #[arg(long, default_value_t = 16)]
    pub m: usize,
    #[arg(long, default_value_t = 0.0)]
    pub xi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub zeta: f64,
    /// Size of a random uniquely solvable instance.
    #[arg(long)]
    pub random_n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Reference tables to run (1-6); all six when omitted.
    #[arg(long = "table", value_parser = clap::value_parser!(u8).range(1..=6))]
    pub tables: Vec<u8>,
    /// Run a single family instead of the reference tables.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), conflicts_with = "tables")]
    pub example: Option<u8>,
    /// Block dimensions for `--example`.
    #[arg(long = "m", value_delimiter = ',', default_values_t = [16, 32, 48, 64])]
    pub block_dims: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub xi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub zeta: f64,
    /// Restrict the reference tables to these block dimensions.
    #[arg(long, value_delimiter = ',')]
    pub only_m: Vec<usize>,
    /// Timed runs per cell; the median is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Also run each cell with the monotone line search.
    #[arg(long)]
    pub compare_monotone: bool,
    /// Directory for one trace CSV per cell.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Re-validate every trace against the solver invariants.
    #[arg(long)]
    pub check: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Md)]
    pub format: OutputFormat,
    /// Cells solved concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Start point value used in every component.
    #[arg(long, default_value_t = 2.0)]
    pub x0: f64,
    /// Write the per-iteration trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Re-read the written trace and check the solver invariants.
    #[arg(long, requires = "trace")]
    pub check: bool,
    /// Print the solution vector.
    #[arg(long)]
    pub print_solution: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Random `D` samples for the `A + B D` check.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Seed for the sampler.
    #[arg(long, default_value_t = 0)]
    pub sample_seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Md)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Smallest instance size; sizes cycle through `n-min..=n-max`.
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative deviation above which an instance counts as a mismatch.
    #[arg(long, default_value_t = 1e-6)]
    pub threshold: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Md)]
    pub format: OutputFormat,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Write a benchmark family in HLCP form instead of GAVE form.
    #[arg(long, requires = "example")]
    pub hlcp: bool,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench(a) => commands::bench(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::OracleCompare(a) => commands::oracle_compare(&a),
        Command::Generate(a) => commands::generate(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
