//! Batch entry point for the pose-sequence synthesis pipeline: build and
//! validate sign dictionaries, stitch manifests into pose datasets, expand
//! augmentation schedules, report dictionary coverage, and score
//! translations.
//!
//! Exit codes: 0 success, 1 validation/data error, 2 usage error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "signstitch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a validated dictionary file from raw angle files (or merge
    /// existing dictionary files).
    BuildDict(BuildDictArgs),
    /// Stitch every manifest record into a pose file plus sidecar.
    Stitch(StitchArgs),
    /// Expand an augmentation schedule over the manifest and stitch every
    /// variant.
    Augment(AugmentArgs),
    /// Report how much of a vocabulary the dictionary covers.
    Coverage(CoverageArgs),
    /// Score hypothesis translations against references (BLEU-1..4, ROUGE-L).
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
struct BuildDictArgs {
    /// Canonical skeleton file the entries are bound to.
    #[arg(long)]
    skeleton: PathBuf,
    /// Output dictionary file.
    #[arg(long)]
    out: PathBuf,
    /// Capture rate recorded in the dictionary (defaults to the inputs').
    #[arg(long)]
    fps: Option<f64>,
    /// Identifier binding entries to the skeleton (defaults to the skeleton
    /// file stem or the input dictionary's id).
    #[arg(long)]
    skeleton_id: Option<String>,
    /// Raw angle files ({gloss, fps, frames}) or dictionary files to merge.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Sspk,
    Json,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// JSON-lines manifest of records to stitch.
    #[arg(long)]
    manifest: PathBuf,
    /// Dictionary file.
    #[arg(long)]
    dict: PathBuf,
    /// Canonical skeleton file.
    #[arg(long)]
    skeleton: PathBuf,
    /// Embedding table for out-of-vocabulary fallback.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out_dir: PathBuf,
    /// Output frame rate.
    #[arg(long, default_value_t = 25.0)]
    fps: f64,
    /// Low-pass cutoff in Hz; per-record values win.
    #[arg(long, default_value_t = 4.0)]
    cutoff: f64,
    /// Resample outputs to this rate after stitching (e.g. 12).
    #[arg(long)]
    subsample_fps: Option<f64>,
    /// Normalize outputs: neck at the origin, shoulders on +x in the
    /// xy-plane.
    #[arg(long)]
    normalize: bool,
    /// Pose file format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Sspk)]
    format: OutputFormat,
    /// Base seed for augmentation variants.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Abort on the first failing record instead of skipping it.
    #[arg(long)]
    strict: bool,
    /// Preprocess manifest glosses: uppercase and strip numbered variant
    /// suffixes before lookup.
    #[arg(long)]
    fold_glosses: bool,
}

#[derive(Debug, Args)]
struct StitchArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Augmentation schedule file.
    #[arg(long)]
    schedule: PathBuf,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    /// Dictionary file.
    #[arg(long)]
    dict: PathBuf,
    /// Take the vocabulary from a manifest's gloss lists.
    #[arg(long, conflicts_with = "vocab", required_unless_present = "vocab")]
    manifest: Option<PathBuf>,
    /// Take the vocabulary from a text file, one gloss per line.
    #[arg(long)]
    vocab: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Hypothesis sentences, one per line.
    #[arg(long)]
    hyp: PathBuf,
    /// Reference sentences, one per line.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Add-one smoothing for tiny corpora.
    #[arg(long)]
    smooth: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::BuildDict(args) => commands::build_dict(args),
        Command::Stitch(args) => commands::stitch(args.pipeline),
        Command::Augment(args) => commands::augment(args.pipeline, args.schedule),
        Command::Coverage(args) => commands::coverage(args),
        Command::Score(args) => commands::score(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
