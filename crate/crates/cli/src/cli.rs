//! Command-line definitions.

use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use penaltysim::linkage::DEFAULT_TIME_TOLERANCE;
use penaltysim::models::Task;
use penaltysim::PolicyKind;

use crate::pipeline::Situation;

#[derive(Debug, Parser)]
#[command(name = "penaltysim", version, about = "Goalkeeper penalty-kick policy evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Link two penalty sources into one record file.
    Merge(MergeArgs),
    /// Write a synthetic record file.
    Generate(GenerateArgs),
    /// Compute the per-kick feature CSV.
    Featurize(FeaturizeArgs),
    /// Fit a direction or distance model.
    Train(TrainArgs),
    /// Grouped nested cross-validation report for a model task.
    EvaluateModels(EvaluateModelsArgs),
    /// Solve the zero-sum penalty game.
    SolveGame(SolveGameArgs),
    /// Expected save probability of policies over a record set.
    Simulate(SimulateArgs),
    /// Aggregate save probability over a grid of early and late ranges.
    SweepRanges(SweepRangesArgs),
    /// Aggregate save probability over start offsets.
    SweepOffset(SweepOffsetArgs),
    /// Grid-search reach ranges and uncertainty parameters.
    FitUncertainty(FitArgs),
    /// Per-policy advice for one kick.
    Advise(AdviseArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Direction,
    Distance,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Direction => Task::Multiclass3,
            TaskArg::Distance => Task::Regression,
        }
    }
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    PolicyKind::parse(s).map_err(|e| e.to_string())
}

fn parse_mix<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| format!("expected {N} comma-separated numbers"))
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    /// Directory holding games.csv and penalties.csv of the annotated source.
    #[arg(long)]
    pub source_a: PathBuf,
    /// Directory holding games.csv and penalties.csv of the event source.
    #[arg(long)]
    pub source_b: PathBuf,
    /// Manual name mappings (kind, source_name, target_name).
    #[arg(long)]
    pub overrides: Option<PathBuf>,
    /// Kick-time window in minutes.
    #[arg(long, default_value_t = DEFAULT_TIME_TOLERANCE)]
    pub time_tolerance: u32,
    #[arg(long)]
    pub out: PathBuf,
    /// Merge report as JSON; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, visible_alias = "n-kicks")]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Generator configuration as JSON; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `.csv` or `.jsonl`.
    #[arg(long, default_value = "records.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long, env = "PENALTYSIM_RECORDS")]
    pub records: PathBuf,
    /// Player biographies CSV (player_id, position, birth_date, height_cm).
    #[arg(long)]
    pub bio: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, env = "PENALTYSIM_RECORDS")]
    pub records: PathBuf,
    /// Feature CSV from `featurize`; computed from the records when absent.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 3)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 100)]
    pub n_trees: usize,
    /// Choose hyperparameters by grouped cross-validation over the search grid.
    #[arg(long, requires = "seed")]
    pub tune: bool,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Fold assignment seed for `--tune`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the empirical simulation tables estimated from the records.
    #[arg(long)]
    pub tables_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Learning rates of the search grid (default 0.01,0.05,0.1).
    #[arg(long, value_delimiter = ',')]
    pub learning_rates: Vec<f64>,
    /// Tree depths of the search grid (default 3,4,5,6).
    #[arg(long, value_delimiter = ',')]
    pub max_depths: Vec<usize>,
    /// Ensemble sizes of the search grid (default 50,100,250).
    #[arg(long, value_delimiter = ',')]
    pub n_trees: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateModelsArgs {
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long, env = "PENALTYSIM_RECORDS")]
    pub records: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub grid: GridArgs,
    /// JSON report; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Out-of-fold model and base outputs per row, as CSV.
    #[arg(long)]
    pub oof_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("game").required(true).args(["payoff", "records"])))]
pub struct SolveGameArgs {
    /// Payoff CSV: either a 4x3 block of numbers, or labelled with a header
    /// row of keeper actions and a leading column of kicker actions.
    #[arg(long)]
    pub payoff: Option<PathBuf>,
    /// Estimate the payoff matrix from a record file instead.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Drop actions whose cells lack support instead of failing.
    #[arg(long)]
    pub restrict: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimInputs {
    /// Records to evaluate.
    #[arg(long, env = "PENALTYSIM_RECORDS")]
    pub records: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Empirical tables JSON from `train --tables-out`; estimated from the
    /// evaluated records when absent.
    #[arg(long, env = "PENALTYSIM_TABLES")]
    pub tables: Option<PathBuf>,
    #[arg(long, env = "PENALTYSIM_DIRECTION_MODEL")]
    pub direction_model: Option<PathBuf>,
    #[arg(long, env = "PENALTYSIM_DISTANCE_MODEL")]
    pub distance_model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    pub situation: Situation,
    #[arg(long, default_value_t = 0.7)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.7)]
    pub rho: f64,
}

#[derive(Debug, Args)]
pub struct KeeperArgs {
    /// Goalkeeper profile JSON; the flags below override its fields.
    #[arg(long)]
    pub gk: Option<PathBuf>,
    #[arg(long)]
    pub early_range: Option<f64>,
    #[arg(long)]
    pub late_range: Option<f64>,
    /// Sets both late correct-corner probabilities.
    #[arg(long)]
    pub p_late: Option<f64>,
    #[arg(long)]
    pub p_late_independent: Option<f64>,
    #[arg(long)]
    pub p_late_dependent: Option<f64>,
    #[arg(long)]
    pub p_early_dependent: Option<f64>,
    #[arg(long)]
    pub start_offset: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Comma-separated policies; defaults to every policy the keeper can run.
    #[arg(long = "policy", value_delimiter = ',', value_parser = parse_policy)]
    pub policies: Vec<PolicyKind>,
    /// Keeper mix (natural early, late, nonnatural early) for the game-theoretic policy.
    #[arg(long, value_parser = parse_mix::<3>)]
    pub gt_mix: Option<[f64; 3]>,
    /// Early dive mix (natural, nonnatural) for the non-educated early policy.
    #[arg(long, value_parser = parse_mix::<2>)]
    pub early_mix: Option<[f64; 2]>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub inputs: SimInputs,
    #[command(flatten)]
    pub keeper: KeeperArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Extra start offset toward the natural corner, in meters.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub offset: f64,
    /// Sample one game-theoretic action per kick instead of the expectation.
    #[arg(long, requires = "seed")]
    pub gt_sample: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-kick results CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepRangesArgs {
    #[command(flatten)]
    pub inputs: SimInputs,
    #[command(flatten)]
    pub keeper: KeeperArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Default 2.6,2.7,2.8,2.9.
    #[arg(long, value_delimiter = ',')]
    pub late_ranges: Vec<f64>,
    /// Default 3.0,3.1,3.2.
    #[arg(long, value_delimiter = ',')]
    pub early_ranges: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepOffsetArgs {
    #[command(flatten)]
    pub inputs: SimInputs,
    #[command(flatten)]
    pub keeper: KeeperArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Default 0,0.1,0.2,0.3.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offsets: Vec<f64>,
    /// Only keeper-independent kicks to the natural corner.
    #[arg(long)]
    pub natural_only: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, env = "PENALTYSIM_RECORDS")]
    pub records: PathBuf,
    /// Default 2.5 to 3.5 in steps of 0.1 (also for late ranges).
    #[arg(long, value_delimiter = ',')]
    pub early_ranges: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub late_ranges: Vec<f64>,
    /// Default 0.5 to 1.0 in steps of 0.1 (also for rho).
    #[arg(long, value_delimiter = ',')]
    pub mus: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub rhos: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("kick").required(true).args(["context", "feature_json"])))]
pub struct AdviseArgs {
    /// Kick context JSON (game situation and taker statistics).
    #[arg(long)]
    pub context: Option<PathBuf>,
    /// Full feature vector JSON (feature name to number or null).
    #[arg(long = "features-json")]
    pub feature_json: Option<PathBuf>,
    #[command(flatten)]
    pub keeper: KeeperArgs,
    #[arg(long, env = "PENALTYSIM_TABLES")]
    pub tables: Option<PathBuf>,
    #[arg(long, env = "PENALTYSIM_DIRECTION_MODEL")]
    pub direction_model: Option<PathBuf>,
    #[arg(long, env = "PENALTYSIM_DISTANCE_MODEL")]
    pub distance_model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.7)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.7)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub offset: f64,
    #[arg(long, value_parser = parse_mix::<3>)]
    pub gt_mix: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_mix::<2>)]
    pub early_mix: Option<[f64; 2]>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "PENALTYSIM_BIND", default_value = "127.0.0.1")]
    pub bind: String,
    #[arg(long, env = "PENALTYSIM_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "PENALTYSIM_DIRECTION_MODEL")]
    pub direction_model: Option<PathBuf>,
    #[arg(long, env = "PENALTYSIM_DISTANCE_MODEL")]
    pub distance_model: Option<PathBuf>,
    #[arg(long, env = "PENALTYSIM_TABLES")]
    pub tables: Option<PathBuf>,
    /// Directory of record files that /evaluate may reference by name.
    #[arg(long, env = "PENALTYSIM_RECORDS_DIR")]
    pub records_dir: Option<PathBuf>,
}
