//! Command-line front end: screening, null generation, classification,
//! simulation, and experiment reproduction.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 no viable
//! cross-validation cutoff. Every seeded command is reproducible
//! byte-for-byte apart from the reports' timing block, at any thread count.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::CmdError;

#[derive(Parser)]
#[command(
    name = "albscreen",
    version,
    about = "Two-class feature screening with log-Bayes-factor statistics from leave-one-out kernel density estimates",
    propagate_version = true
)]
struct Cli {
    /// Worker thread count; defaults to ALBSCREEN_THREADS or all cores.
    /// Output is identical for any value.
    #[arg(long, global = true, env = "ALBSCREEN_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen features of a labeled CSV and write a JSON run report plus a
    /// selected-feature list.
    Screen(ScreenArgs),
    /// Generate a synthetic scenario dataset (CSV) with an importance-mask
    /// sidecar file.
    Simulate(SimulateArgs),
    /// Screen and fit on a training CSV, then classify a test CSV.
    Classify(ClassifyArgs),
    /// Reproduce a simulation experiment as tidy CSV.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Log-Bayes-factor screening with the Hall kernel.
    Alb,
    /// Welch t-test screening.
    Ttest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Location,
    Scale,
    Shape,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Hall,
    /// Diagnostic alternative for sensitivity checks.
    Gaussian,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    /// Statistic CDF separation study (shape scenario).
    Cdf,
    /// Screening-vs-classifier comparison (no screen / t-test / statistic).
    Compare,
    /// Classifier accuracy curve at zero cutoff (shape scenario).
    BayesCurve,
}

#[derive(Args)]
struct ScreenArgs {
    /// Input CSV; optional header row is auto-detected.
    #[arg(long)]
    input: PathBuf,
    /// Label column, by header name or 0-based index.
    #[arg(long)]
    label_col: String,
    #[arg(long, value_enum, default_value = "alb")]
    method: MethodArg,
    /// One of: zero | top-d[=K] | perm=ALPHA,B,D | cv | p-value=ALPHA.
    /// top-d without K keeps the m+n largest statistics.
    #[arg(long)]
    cutoff: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON path; the selected list goes to <out>.selected.txt unless
    /// --selected-out is given.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    selected_out: Option<PathBuf>,
    /// Remove constant columns before screening (reported indices stay
    /// relative to the original columns).
    #[arg(long)]
    drop_constant: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Class-1 row count.
    #[arg(long)]
    m: usize,
    /// Class-0 row count.
    #[arg(long)]
    n: usize,
    /// Feature count.
    #[arg(long)]
    p: usize,
    /// Probability that a feature is important.
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes <prefix>.csv and <prefix>.mask.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    label_col: String,
    #[arg(long, value_enum, default_value = "alb")]
    method: MethodArg,
    /// Screening cutoff applied to the training set (see `screen --help`).
    #[arg(long, default_value = "zero")]
    cutoff: String,
    /// Classifier kernel.
    #[arg(long, value_enum, default_value = "hall")]
    kernel: KernelArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the fitted model as versioned JSON.
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Predict from a saved model instead of screening and fitting.
    #[arg(long, conflicts_with_all = ["model_out", "method", "cutoff", "kernel"])]
    model_in: Option<PathBuf>,
    /// Predictions CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON run report with metrics.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    name: ExperimentName,
    /// Scenario for `compare` (cdf and bayes-curve are shape by definition).
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    /// Comma-separated per-class training sizes, e.g. 10,20,40.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Label permutations per feature for permutation nulls.
    #[arg(long)]
    perm_d: Option<usize>,
    #[arg(long)]
    ttest_alpha: Option<f64>,
    #[arg(long)]
    alb_alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tidy CSV output path.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot build thread pool: {e}");
            return ExitCode::from(2);
        }
    };

    let outcome = pool.install(|| match cli.command {
        Command::Screen(args) => commands::screen(&args, threads),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Classify(args) => commands::classify(&args, threads),
        Command::Experiment(args) => commands::experiment(&args),
    });

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

impl CmdError {
    fn exit_code(&self) -> u8 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::Data(_) => 3,
            CmdError::NoViableCutoff => 4,
        }
    }
}
