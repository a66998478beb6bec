mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::UsageError;

#[derive(Parser, Debug)]
#[command(
    name = "sidon-fq",
    version,
    about = "Random Sidon-type sequences of polynomials over F_q"
)]
struct Cli {
    /// JSON file supplying default values; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Characteristic.
    #[arg(long)]
    pub p: Option<u64>,
    /// Extension degree (q = p^s); defaults to 1.
    #[arg(long)]
    pub s: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sum decomposition of p_N.
    Pair {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        n_index: Option<u64>,
    },
    /// Difference pairs of p_N in the class S_{u,n}.
    DiffPair {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        n_index: Option<u64>,
        #[arg(long)]
        u: Option<u64>,
    },
    /// r_N or t_N of a stored or freshly sampled sequence.
    Count(commands::CountArgs),
    /// Exact law of r_N and its bounds.
    Prob {
        #[command(subcommand)]
        which: ProbCommand,
    },
    /// lambda_N, lambda'_N, Q*, m*_N and the closed-form band.
    Lambda(commands::QueryArgs),
    /// Sample a sequence and write it out.
    Sample(commands::SampleArgs),
    /// Monte Carlo experiments.
    Experiment {
        #[command(subcommand)]
        which: ExperimentCommand,
    },
    /// Run the brute-force oracle suites.
    Validate {
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
enum ProbCommand {
    Exact(commands::QueryArgs),
    Bounds(commands::QueryArgs),
}

#[derive(Subcommand, Debug)]
enum ExperimentCommand {
    /// Concentration of r_N under the sqrt-log schedule.
    Thm01(commands::ConcentrationArgs),
    /// Bounded r_N under the thick schedule.
    Thm02(commands::ThickArgs),
    /// Bounded t_N under the thick schedule.
    Thm03(commands::ThickArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Why a command stopped.
pub enum Failure {
    /// Exit code 2.
    Usage(String),
    /// Exit code 1.
    Runtime(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<sidon_fq::Error> for Failure {
    fn from(e: sidon_fq::Error) -> Self {
        use sidon_fq::Error as E;
        match e {
            E::Format(_) | E::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = config::thread_cap()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let cfg = config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Pair { field, n_index } => commands::pair(&cfg, &field, n_index),
        Command::DiffPair { field, n_index, u } => commands::diff_pair(&cfg, &field, n_index, u),
        Command::Count(args) => commands::count(&cfg, &args),
        Command::Prob {
            which: ProbCommand::Exact(args),
        } => commands::prob_exact(&cfg, &args),
        Command::Prob {
            which: ProbCommand::Bounds(args),
        } => commands::prob_bounds(&cfg, &args),
        Command::Lambda(args) => commands::lambda(&cfg, &args),
        Command::Sample(args) => commands::sample(&cfg, &args),
        Command::Experiment { which } => match which {
            ExperimentCommand::Thm01(args) => commands::thm01(&cfg, &args),
            ExperimentCommand::Thm02(args) => {
                commands::thick(&cfg, &args, sidon_fq::CountKind::Sum)
            }
            ExperimentCommand::Thm03(args) => {
                commands::thick(&cfg, &args, sidon_fq::CountKind::Diff)
            }
        },
        Command::Validate { seed } => commands::validate(&cfg, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
