//! Command-line front end for the qspois library: simulate quasi-sparse
//! count data, test observed counts for signals, tabulate the closed-form
//! risk-ratio ceiling, reproduce the misclassification studies, and trace
//! posterior shrinkage curves.
//!
//! Every command is deterministic given its full flag set, and every output
//! file is rendered in memory before the path is touched, so a failure never
//! leaves a partial file behind. Exit codes: 0 success, 1 usage (bad flags,
//! config contents, or input format), 2 numeric failure, 3 I/O failure.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qspois::{CoreError, PriorConfig, PriorFamilyConfig};

mod commands;
mod input;

/// A classified failure: the variant fixes the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config contents, or input-file format.
    Usage(String),
    /// A computation failed to converge or left its domain.
    Numeric(CoreError),
    /// The filesystem (or output serialization) failed.
    Io(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(message) | CliError::Io(message) => write!(f, "{message}"),
            CliError::Numeric(error) => write!(f, "{error}"),
        }
    }
}

/// Classifies a library error raised while computing: embedded filesystem and
/// serialization failures are I/O, everything else is numeric.
pub fn numeric(error: CoreError) -> CliError {
    match error {
        CoreError::Io(_) | CoreError::Csv(_) | CoreError::Serialize(_) => {
            CliError::Io(error.to_string())
        }
        _ => CliError::Numeric(error),
    }
}

/// Classifies a library error raised while validating values that came from
/// flags or a config file: those are usage errors.
pub fn usage_from(error: CoreError) -> CliError {
    CliError::Usage(error.to_string())
}

#[derive(Parser)]
#[command(
    name = "qspois",
    version,
    about = "Bayesian multiple testing and mean estimation for quasi-sparse Poisson counts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test observed counts for signals and estimate their Poisson means
    Analyze(AnalyzeArgs),
    /// Draw a synthetic dataset from the two-group count model
    Simulate(SimulateArgs),
    /// Tabulate the risk-ratio ceiling over an (a, alpha, delta) grid
    Bounds(BoundsArgs),
    /// Run a replicated misclassification study from a config file
    Experiment(ExperimentArgs),
    /// Trace posterior shrinkage and mean estimates over a count range
    PosteriorCurve(PosteriorCurveArgs),
}

/// Shrinkage-prior families selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorFamilyArg {
    /// Three-parameter beta mixing density on the local scales
    Tpbn,
    /// Generalized double Pareto mixing density
    Gdp,
    /// Gauss-hypergeometric prior directly on the shrinkage weight
    Gh,
}

impl From<PriorFamilyArg> for PriorFamilyConfig {
    fn from(family: PriorFamilyArg) -> Self {
        match family {
            PriorFamilyArg::Tpbn => PriorFamilyConfig::Tpbn,
            PriorFamilyArg::Gdp => PriorFamilyConfig::Gdp,
            PriorFamilyArg::Gh => PriorFamilyConfig::Gh,
        }
    }
}

/// Shrinkage-prior selection shared by `analyze` and `posterior-curve`.
#[derive(Args)]
pub struct PriorArgs {
    /// Shrinkage prior family placed on the Poisson means
    #[arg(long = "prior", value_enum, default_value_t = PriorFamilyArg::Tpbn)]
    pub family: PriorFamilyArg,

    /// First prior hyperparameter (controls behaviour near the origin)
    #[arg(long, default_value_t = 1.5)]
    pub a1: f64,

    /// Second prior hyperparameter (controls tail heaviness)
    #[arg(long, default_value_t = 1.5)]
    pub a2: f64,

    /// Third hyperparameter of the gh family (defaults to 1 when omitted)
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl PriorArgs {
    pub fn to_config(&self) -> Result<PriorConfig, CliError> {
        if self.gamma.is_some() && self.family != PriorFamilyArg::Gh {
            return Err(CliError::usage(
                "--gamma only applies to the gh prior family",
            ));
        }
        Ok(PriorConfig {
            family: self.family.into(),
            a1: self.a1,
            a2: self.a2,
            gamma: self.gamma,
        })
    }
}

/// Exactly one way of fixing the global shrinkage parameter.
#[derive(Args)]
#[group(required = true, multiple = false)]
pub struct TauModeArgs {
    /// Fix the global shrinkage parameter to this value in (0, 1]
    #[arg(long)]
    pub tau: Option<f64>,

    /// Estimate the global parameter from the data as
    /// max{1/n, (#counts >= K)/n}
    #[arg(long, value_name = "K")]
    pub eb_threshold: Option<u64>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Input CSV: one count per row, optional `count` header, optional
    /// second column of region labels (carried through to the output)
    #[arg(long)]
    pub input: PathBuf,

    /// Output CSV path (`index,count,e_theta,evidence,reject[,region]`)
    #[arg(long)]
    pub output: PathBuf,

    #[command(flatten)]
    pub prior: PriorArgs,

    /// Gamma shape of the Poisson-mean prior
    #[arg(long)]
    pub alpha: f64,

    /// Signal-over-null scale separation assumed by the decision threshold
    #[arg(long)]
    pub delta: f64,

    #[command(flatten)]
    pub tau_mode: TauModeArgs,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Gamma shape shared by the null and signal groups
    #[arg(long)]
    pub alpha: f64,

    /// Null-group rate parameter (small beta concentrates nulls near zero)
    #[arg(long)]
    pub beta: f64,

    /// Extra scale separating the signal group from the nulls
    #[arg(long)]
    pub delta: f64,

    /// Signal proportion, strictly inside (0, 1)
    #[arg(long)]
    pub p: f64,

    /// Number of counts to draw
    #[arg(long)]
    pub n: u64,

    /// RNG seed; the same seed reproduces the same file byte for byte
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output CSV path (`index,count,truth`)
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct BoundsArgs {
    /// Grid CSV with columns `a,alpha,delta` (optional header); when
    /// omitted, the nine-row reference grid is tabulated
    #[arg(long)]
    pub grid: Option<PathBuf>,

    /// Output CSV path
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// TOML study configuration (see the packaged files under configs/)
    #[arg(long)]
    pub config: PathBuf,

    /// Directory the tables and the JSON report are written into
    #[arg(long)]
    pub out_dir: PathBuf,

    /// Validate the configuration and report the run plan without running
    #[arg(long)]
    pub check: bool,
}

#[derive(Args)]
pub struct PosteriorCurveArgs {
    /// Output CSV path (`y,e_kappa,e_one_minus_kappa,e_theta,method`)
    #[arg(long)]
    pub output: PathBuf,

    #[command(flatten)]
    pub prior: PriorArgs,

    /// Gamma shape of the Poisson-mean prior
    #[arg(long)]
    pub alpha: f64,

    /// Global shrinkage parameter in (0, 1]
    #[arg(long)]
    pub tau: f64,

    /// Largest count to trace; the curve covers y = 0..=y_max
    #[arg(long, default_value_t = 50)]
    pub y_max: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            // --help and --version print to stdout and succeed; everything
            // else is a usage failure
            let _ = error.print();
            return if error.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => commands::analyze(&args),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Bounds(args) => commands::bounds(&args),
        Command::Experiment(args) => commands::experiment(&args),
        Command::PosteriorCurve(args) => commands::posterior_curve(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code())
        }
    }
}
