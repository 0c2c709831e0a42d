use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mamid_core::dataset::Level;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "mamid", version, about = "Multi-tiered neural-network intrusion detection pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean and scale a flow CSV into the feature matrix used by later stages.
    Preprocess(PreprocessArgs),
    /// Write a synthetic nine-class flow CSV with the IoTID20 label layout.
    Synth(SynthArgs),
    /// Grid-search hyperparameters on a stratified subset and select one configuration.
    Tune(TuneArgs),
    /// Train the selected configuration and report test metrics per level.
    Validate(ValidateArgs),
    /// Shapley-value attributions for a trained model.
    Explain(ExplainArgs),
    /// Summarize every stage found in the output directory.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory shared by all stages.
    #[arg(long, default_value = "mamid-out")]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads [default: MAMID_THREADS, else the number of CPUs].
    #[arg(long, env = "MAMID_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    pub parallelism: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelArg {
    Binary,
    Category,
    Subcategory,
    All,
}

impl LevelArg {
    pub fn levels(self) -> Vec<Level> {
        match self {
            LevelArg::Binary => vec![Level::Binary],
            LevelArg::Category => vec![Level::Category],
            LevelArg::Subcategory => vec![Level::Subcategory],
            LevelArg::All => Level::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    /// Rows drawn (stratified on subcategory) for tuning and subset validation.
    #[arg(long, default_value_t = 10_000)]
    pub subset_size: usize,
    /// Share of rows held out for testing.
    #[arg(long, default_value_t = 0.25)]
    pub test_fraction: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PreprocessArgs {
    /// Raw flow CSV with Label, Cat and Sub_Cat columns.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10_000)]
    pub rows: usize,
    /// Distance between class means, in standard deviations.
    #[arg(long, default_value_t = 6.0)]
    pub separation: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TuneArgs {
    /// Raw flow CSV, preprocessed first when the preprocess stage has not run.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LevelArg::All)]
    pub level: LevelArg,
    #[command(flatten)]
    pub split: SplitArgs,
    /// JSON grid space; the default is the full 1000-point grid.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Select from an existing top-k CSV instead of running the grid.
    #[arg(long)]
    pub from_tables: Option<PathBuf>,
    /// Mean-accuracy gap under which numeric options count as tied.
    #[arg(long, default_value_t = 1e-3)]
    pub tie_tolerance: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    /// Raw flow CSV, preprocessed first when the preprocess stage has not run.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LevelArg::All)]
    pub level: LevelArg,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Train and test on a split of every row instead of the tuning subset.
    #[arg(long)]
    pub full: bool,
    /// Selection file [default: <out>/tune/selection.json].
    #[arg(long)]
    pub selection: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExplainArgs {
    /// Model bundle written by `validate` (or a hand-written linear bundle).
    #[arg(long)]
    pub model: PathBuf,
    /// Feature CSV to draw rows from [default: the bundle's own split].
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Rows to explain.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Background rows used to fill absent features.
    #[arg(long, default_value_t = 100)]
    pub background: usize,
    /// Attribution players; extra features are pooled into one.
    #[arg(long, default_value_t = 12)]
    pub max_players: usize,
    /// Coalitions sampled per row when players cannot be enumerated.
    #[arg(long, default_value_t = 2048)]
    pub coalitions: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
}
