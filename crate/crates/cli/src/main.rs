//! `veritext` command-line tool.
//!
//! Exit status: 0 on success, 1 for user or configuration errors, 2 when a
//! run fails at runtime.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use veritext::explain::Method;
use veritext::model::ModelKind;

use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "veritext", version, about = "Fake-news classification toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand. Flags win over the config file.
#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Global seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for written artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Run all loops sequentially.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Add a corpus, as NAME=PATH or PATH.
    #[arg(long = "corpus", global = true, value_name = "NAME=PATH")]
    pub corpora: Vec<String>,
    /// Keep documents with empty text.
    #[arg(long, global = true)]
    pub allow_empty: bool,
    #[arg(long, global = true, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub lexicon: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summary statistics and top words per class.
    Stats(StatsArgs),
    /// Train a model and write it with its history.
    Train(TrainArgs),
    /// Score a saved model on a test selection.
    Evaluate(EvaluateArgs),
    /// Run a list of experiments and print the results table.
    Matrix(MatrixArgs),
    /// Write a synonym-augmented copy of a corpus.
    Augment(AugmentArgs),
    /// Explain one prediction as HTML and JSON.
    Explain(ExplainArgs),
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Corpus files, as NAME=PATH or PATH. Defaults to the configured corpora.
    pub paths: Vec<String>,
    #[arg(long)]
    pub json: bool,
    /// Words listed per class.
    #[arg(long, default_value_t = 50)]
    pub top: usize,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub model: Option<ModelKind>,
    /// Training selection, e.g. "SA1 Subset1" or "SA1 Subset1 + US1 Subset1".
    #[arg(long)]
    pub train: Option<String>,
    /// Augment the training part (default settings unless configured).
    #[arg(long)]
    pub augment: bool,
    /// Real documents kept per fake document.
    #[arg(long)]
    pub imbalance: Option<f64>,
    /// Training epochs for the chosen model.
    #[arg(long)]
    pub epochs: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Saved model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Test selection, e.g. "SA1 Subset2".
    #[arg(long)]
    pub test: Option<String>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug)]
pub struct MatrixArgs {
    /// Use the built-in sixteen-row cross-corpus study.
    #[arg(long)]
    pub table2: bool,
    #[arg(long)]
    pub repetitions: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AugmentArgs {
    /// Corpus to augment, as NAME=PATH or PATH.
    #[arg(long)]
    pub input: String,
    /// Output JSONL file.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub copies: Option<usize>,
    #[arg(long)]
    pub replace_prob: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ExplainArgs {
    /// Saved model file.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Article text file; `-` or absent reads stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Document id shown in the report.
    #[arg(long)]
    pub id: Option<String>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// LIME perturbation samples.
    #[arg(long)]
    pub samples: Option<usize>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s.to_ascii_lowercase().as_str() {
        "lime" => Ok(Method::Lime),
        "intrinsic" | "attention" => Ok(Method::Intrinsic),
        other => Err(format!("unknown method {other:?} (expected lime or intrinsic)")),
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    match cli.command {
        Command::Stats(a) => commands::stats(common, &a),
        Command::Train(a) => commands::train(common, &a),
        Command::Evaluate(a) => commands::evaluate(common, &a),
        Command::Matrix(a) => commands::matrix(common, &a),
        Command::Augment(a) => commands::augment(common, &a),
        Command::Explain(a) => commands::explain(common, &a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.common.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            f.exit_code()
        }
    }
}
