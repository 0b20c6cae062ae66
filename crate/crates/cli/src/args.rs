use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mrfqubo", version, about = "MRF MAP inference as QUBO, with a coarse-to-fine stereo pipeline")]
pub struct Cli {
    /// Cap on worker threads for bundle- and read-parallel work.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode an MRF as a QUBO file (plus a JSON sidecar).
    Encode(EncodeArgs),
    /// Solve a QUBO (or an MRF with chain-dp) and write a JSON report.
    Solve(SolveArgs),
    /// Run coarse-to-fine stereo matching on a rectified pair.
    Stereo(StereoArgs),
    /// Score a disparity map against ground truth.
    Eval(EvalArgs),
    /// Print problem-graph statistics of a QUBO.
    Stats(StatsArgs),
    /// Sweep one pipeline setting and emit RMSE/BPP per setting as CSV.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Onehot,
    Binary,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Plain-text MRF file.
    #[arg(long, conflicts_with = "stereo_line", required_unless_present = "stereo_line")]
    pub mrf: Option<PathBuf>,
    /// Generate a synthetic stereo line MRF instead, as WIDTHxLABELS (e.g. 108x6).
    #[arg(long, value_name = "WIDTHxLABELS")]
    pub stereo_line: Option<String>,
    #[arg(long, value_enum, default_value = "onehot")]
    pub scheme: Scheme,
    /// Margin rule: rel, rel:<factor> or abs:<value>.
    #[arg(long, default_value = "rel")]
    pub epsilon_rule: String,
    /// Rectifier strength.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Output QUBO file; the sidecar goes to <out>.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the MRF (useful with --stereo-line).
    #[arg(long)]
    pub mrf_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverId {
    Exhaustive,
    Sa,
    ChainDp,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// QUBO file; a sidecar at <qubo>.json is applied when present.
    #[arg(long, required_unless_present = "mrf")]
    pub qubo: Option<PathBuf>,
    /// MRF file: required for chain-dp, and enables MRF-level reporting otherwise.
    #[arg(long)]
    pub mrf: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: SolverId,
    #[arg(long, default_value_t = 500)]
    pub reads: usize,
    #[arg(long, default_value_t = 1000)]
    pub sweeps: usize,
    #[arg(long, requires = "beta_end")]
    pub beta_start: Option<f64>,
    #[arg(long, requires = "beta_start")]
    pub beta_end: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include wall-clock time in the report (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// TOML stereo configuration; defaults to the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "middlebury")]
    pub preset: Preset,
    /// Override the configured per-bundle solver.
    #[arg(long, value_enum)]
    pub solver: Option<SolverId>,
    #[arg(long)]
    pub reads: Option<usize>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Override the rectifier strength used by the QUBO solvers.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Middlebury,
    Sintel,
}

#[derive(Debug, Args)]
pub struct StereoArgs {
    #[arg(long, required_unless_present = "synthetic")]
    pub left: Option<PathBuf>,
    #[arg(long, required_unless_present = "synthetic")]
    pub right: Option<PathBuf>,
    /// Use a built-in synthetic scene (with ground truth) as input.
    #[arg(long, conflicts_with_all = ["left", "right"])]
    pub synthetic: Option<String>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Output 16-bit PGM.
    #[arg(long)]
    pub out: PathBuf,
    /// Disparity scale of the output PGM.
    #[arg(long, default_value_t = 8.0)]
    pub scale: f64,
    /// Float sidecar path; defaults to <out>.disp.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    /// Ground-truth PGM for inline metrics.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long, default_value_t = 8.0)]
    pub gt_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Metrics JSON path (when ground truth is available); stdout otherwise.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Per-level, per-bundle energy log as JSON.
    #[arg(long)]
    pub energy_log: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Estimated disparity: 16-bit PGM or float sidecar (by QSDISP01 magic).
    #[arg(long)]
    pub est: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Ground-truth PGM scale.
    #[arg(long, default_value_t = 8.0)]
    pub scale: f64,
    /// Scale of an estimated PGM.
    #[arg(long, default_value_t = 8.0)]
    pub est_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Ignore this many border pixels.
    #[arg(long, default_value_t = 0)]
    pub crop: usize,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub qubo: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ablation {
    Regularizer,
    Filters,
    Levels,
    T,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long, value_enum)]
    pub which: Ablation,
    /// Comma-separated settings: regularizer truncated,linear,none; filters
    /// all,median,bilateral,none; levels = number of finest levels kept; t = values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<String>,
    /// Scenes: synthetic names, or Middlebury names when --middlebury is given.
    #[arg(long, value_delimiter = ',')]
    pub scenes: Vec<String>,
    /// Middlebury root directory (scene subdirectories inside).
    #[arg(long)]
    pub middlebury: Option<PathBuf>,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
