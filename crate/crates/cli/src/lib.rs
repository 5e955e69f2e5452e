//! `bell-lab` experiment runner: one subcommand per verifiable claim, each
//! producing a deterministic JSON report and CSV tables for plotting.

pub mod angle_arg;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use bell_lab::seqcore::Angle;
pub use report::{Check, Report, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PROPERTY_FAILURE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] bell_lab::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "bell-lab", version, about = "Bell-type gedanken experiments at desk scale")]
pub struct Cli {
    #[command(flatten)]
    pub experiment: ExperimentConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct ExperimentConfig {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Sample count (trials for `protocol`, random cases for `identities`).
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// Output directory; nothing is written without it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// `key = value` file mirroring the long flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

fn angle(s: &str) -> Result<Angle, String> {
    angle_arg::parse_angle(s)
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Exhaustive and random checks of the finite-length identities.
    Identities(IdentitiesArgs),
    /// Singlet correlation at one setting or over a grid of angle differences.
    Singlet(SingletArgs),
    /// Three-axis inequality: analytic scenario, certificate and sampled data.
    V3,
    /// CHSH inequality: analytic scenario, certificate and sampled data.
    V4,
    /// Correlation between successive measurements on one side.
    Nocorr(NocorrArgs),
    /// Block-threshold discrimination of source correlations.
    Protocol(ProtocolArgs),
    /// Joint-distribution feasibility of pairwise correlation targets.
    Feasible(FeasibleArgs),
    /// Local hidden-variable batches against every inequality.
    Lhv(LhvArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Identities(_) => "identities",
            Command::Singlet(_) => "singlet",
            Command::V3 => "v3",
            Command::V4 => "v4",
            Command::Nocorr(_) => "nocorr",
            Command::Protocol(_) => "protocol",
            Command::Feasible(_) => "feasible",
            Command::Lhv(_) => "lhv",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 4)]
    pub max_exhaustive_len: usize,
    #[arg(long, default_value_t = 1000)]
    pub random_len: usize,
    #[arg(long, hide = true)]
    pub inject_corruption: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SingletArgs {
    #[arg(long, value_parser = angle, default_value = "0deg", allow_hyphen_values = true)]
    pub theta_e: Angle,
    #[arg(long, value_parser = angle, default_value = "0deg", allow_hyphen_values = true)]
    pub theta_p: Angle,
    /// Sweep Δθ = 2πk/points, k = 0..points, instead of one setting.
    #[arg(long)]
    pub grid: bool,
    #[arg(long, default_value_t = 12)]
    pub grid_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NocorrModel {
    Sequential,
    Toy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    PFirst,
    EFirst,
}

#[derive(Debug, Clone, Args)]
pub struct NocorrArgs {
    #[arg(long, value_parser = angle, default_value = "0deg", allow_hyphen_values = true)]
    pub theta_p: Angle,
    #[arg(long, value_parser = angle, default_value = "3pi/4", allow_hyphen_values = true)]
    pub theta_e: Angle,
    #[arg(long, value_parser = angle, default_value = "-3pi/4", allow_hyphen_values = true)]
    pub theta_e_prime: Angle,
    #[arg(long, value_enum, default_value_t = NocorrModel::Sequential)]
    pub model: NocorrModel,
    /// Non-local coupling of the toy model.
    #[arg(long, default_value_t = 0.0)]
    pub coupling: f64,
    #[arg(long, value_enum, default_value_t = OrderArg::PFirst)]
    pub order: OrderArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlignmentArg {
    Successive,
    Isochronous,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TemporalArg {
    Memoryless,
    Markov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReaderArg {
    S0,
    S1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Auto,
    Step,
    Block,
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    /// Block length Q.
    #[arg(long, default_value_t = 1001)]
    pub q: u64,
    /// Trigger threshold P.
    #[arg(long, default_value_t = 100)]
    pub p: u64,
    /// Source correlations to compare.
    #[arg(long, value_delimiter = ',', default_value = "-1,0,0.7,1", allow_hyphen_values = true)]
    pub rho: Vec<f64>,
    #[arg(long, value_enum, default_value_t = AlignmentArg::Both)]
    pub alignment: AlignmentArg,
    #[arg(long, value_enum, default_value_t = TemporalArg::Memoryless)]
    pub temporal: TemporalArg,
    #[arg(long, default_value_t = 0.9)]
    pub persistence: f64,
    #[arg(long, value_enum, default_value_t = ReaderArg::S0)]
    pub reader: ReaderArg,
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    pub engine: EngineArg,
    /// Independent seeded repetitions of the whole comparison.
    #[arg(long, default_value_t = 1)]
    pub repetitions: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_blocks: u64,
    /// Use L = 450000 trials unless `--n` is given.
    #[arg(long)]
    pub full_scale: bool,
    /// Write per-trial (σ, σ′, v) tables for the first repetition.
    #[arg(long)]
    pub records: bool,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false, id = "target_source")]
pub struct FeasibleArgs {
    /// JSON target: {"n": 3, "pairs": [{"i": 0, "j": 1, "value": 0.5}, ...]}.
    #[arg(long, group = "target_source")]
    pub target: Option<PathBuf>,
    /// Three-variable target c01,c02,c12.
    #[arg(long, group = "target_source", value_delimiter = ',', allow_hyphen_values = true)]
    pub triple: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct LhvArgs {
    #[arg(long, default_value_t = 10)]
    pub batches: u64,
}

/// Parses arguments (after config expansion) into a [`Cli`].
pub fn parse_args<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(args)
}

/// Runs the subcommand on a pool of `experiment.workers` threads.
pub fn run_command(cli: &Cli) -> Result<Report, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.experiment.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| commands::dispatch(&cli.experiment, &cli.command))
}

fn metadata(cli: &Cli) -> serde_json::Value {
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "command": cli.command.name(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "unix_time": ts,
        "workers": cli.experiment.workers.unwrap_or_else(rayon::current_num_threads),
    })
}

/// Full CLI behavior: config expansion, parsing, running, writing outputs.
/// Returns the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match config::expand_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let report = match run_command(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    print!("{}", report.summary());
    if let Some(dir) = &cli.experiment.out {
        match report.write_to(dir, cli.experiment.format, &metadata(&cli)) {
            Ok(files) => {
                for f in files {
                    println!("  wrote {}", f.display());
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILURE
    }
}
