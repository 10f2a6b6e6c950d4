use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Smoking-intention modelling pipeline for youth tobacco survey data.
#[derive(Debug, Parser)]
#[command(name = "nyts", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Question catalog (TOML). Defaults to the built-in NYTS 2018 catalog.
    #[arg(long, global = true, env = "NYTS_CATALOG")]
    pub catalog: Option<PathBuf>,

    /// Run training and evaluation on one thread. Results are identical
    /// either way.
    #[arg(long, global = true, env = "NYTS_SEQUENTIAL")]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Raw survey CSV to a labelled, never-smoker dataset.
    Prepare(PrepareArgs),
    /// Fit one model and save it as an .imodel file.
    Train(TrainArgs),
    /// Classification report for a saved model on a prepared dataset.
    Evaluate(EvaluateArgs),
    /// Cross-validated and held-out accuracy for the five classifiers.
    Compare(CompareArgs),
    /// Generate a synthetic raw survey CSV with a planted signal.
    Synth(SynthArgs),
    /// Run the HTTP prediction service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetPolicyArg {
    Q16Only,
    AnyOfSix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutOfDomainArg {
    Reject,
    Unanswered,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long, env = "NYTS_INPUT")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "q16-only")]
    pub target_policy: TargetPolicyArg,
    /// Also apply the Q59 "refused sale" question to the cohort filter.
    #[arg(long)]
    pub cohort_q59: bool,
    /// Also require never having used e-cigarettes.
    #[arg(long)]
    pub cohort_non_e_smoker: bool,
    /// What to do with answer codes the catalog does not define.
    #[arg(long, value_enum, default_value = "reject")]
    pub out_of_domain: OutOfDomainArg,
    /// Replace each answer code with 0/1 indicator columns.
    #[arg(long)]
    pub one_hot: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Preparation report (JSON). Defaults to `<out>.report.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Linear,
    Logistic,
    Nb,
    Tree,
    Forest,
    Gb,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    /// Seed for the split, folds, and randomised learners.
    #[arg(long, default_value_t = 0, env = "NYTS_SEED")]
    pub seed: u64,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    /// Split without preserving class proportions.
    #[arg(long)]
    pub no_stratify: bool,
}

/// Optional overrides; anything unset keeps the learner's default.
#[derive(Debug, Clone, Default, Args)]
pub struct HyperArgs {
    /// Gradient-descent step (linear, logistic) or boosting shrinkage (gb).
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub weight_cap: Option<f64>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub features_per_tree: Option<usize>,
    #[arg(long)]
    pub no_bootstrap: bool,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples: Option<usize>,
    #[arg(long)]
    pub stages: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub hyper: HyperArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Also write the full-precision report as JSON.
    #[arg(long)]
    pub report_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Add the linear-threshold model to the five classifiers.
    #[arg(long)]
    pub include_linear: bool,
    /// Comparison data file (CSV).
    #[arg(long, default_value = "comparison.csv")]
    pub out: PathBuf,
    /// Plot output: an `.svg` path renders a bar chart, anything else gets the
    /// plot data as CSV.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    pub rows: usize,
    /// Planted signal, e.g. `Q6=2,Q27=-1.5,noise=0.5`, or `none`.
    #[arg(long, default_value = "Q6=1.5,Q27=-1,Q61=0.8,noise=0.5")]
    pub signal: String,
    #[arg(long, default_value_t = 0, env = "NYTS_SEED")]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "NYTS_MODEL", required_unless_present = "no_model")]
    pub model: Option<PathBuf>,
    /// Start without a model; health reports `degraded` and predictions 503.
    #[arg(long, conflicts_with = "model")]
    pub no_model: bool,
    #[arg(long, default_value = "127.0.0.1", env = "NYTS_BIND")]
    pub bind: String,
    #[arg(long, default_value_t = 8080, env = "NYTS_PORT")]
    pub port: u16,
    /// Allowed CORS origins (comma separated, `*` for any).
    #[arg(
        long,
        env = "NYTS_CORS_ORIGINS",
        value_delimiter = ',',
        default_value = "http://localhost:5173,http://127.0.0.1:5173"
    )]
    pub cors_origin: Vec<String>,
}
