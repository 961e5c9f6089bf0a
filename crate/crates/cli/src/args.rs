use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Environment variable overriding the worker count of every command.
pub const WORKERS_ENV: &str = "SCOPEBENCH_WORKERS";

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "scopebench", version, about = "Corruption corpora and robustness scores for endoscopic depth estimation")]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    /// Print the built-in severity registry and exit.
    #[arg(long)]
    pub dump_config: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a corrupted copy of every frame for each (kind, severity) cell.
    Corrupt(CorruptArgs),
    /// Score a prediction tree against ground truth and write a grid file.
    Evaluate(EvaluateArgs),
    /// Render mDERS / mCE tables, boxplot data and a summary from grid files.
    Report(ReportArgs),
    /// Colormap depth maps, singly or as comparison strips.
    RenderDepth(RenderArgs),
    /// Print the built-in severity registry.
    DumpConfig(DumpArgs),
}

#[derive(Debug, Args)]
pub struct Workers {
    /// Worker threads; 0 uses every core.
    #[arg(long, env = WORKERS_ENV, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct Filters {
    /// Comma-separated corruption kinds (default: all sixteen).
    #[arg(long, value_delimiter = ',')]
    pub kinds: Vec<String>,
    /// Comma-separated severities 1-5 (default: all five).
    #[arg(long, value_delimiter = ',')]
    pub severities: Vec<u8>,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    /// Directory of clean `.png` frames.
    #[arg(long = "in", value_name = "DIR")]
    pub input: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Severity registry (TOML); defaults to the built-in table.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Text file with one frame id per line instead of every frame in `--in`.
    #[arg(long, value_name = "FILE")]
    pub frames: Option<PathBuf>,
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Identifier stored in the manifest (default: the output directory name).
    #[arg(long)]
    pub corpus_id: Option<String>,
    #[command(flatten)]
    pub filters: Filters,
    #[command(flatten)]
    pub workers: Workers,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Ground-truth depth directory.
    #[arg(long, value_name = "DIR")]
    pub gt: PathBuf,
    /// Prediction tree: `{kind}/{severity}/` and optionally `clean/`.
    #[arg(long, value_name = "DIR")]
    pub pred: PathBuf,
    #[arg(long)]
    pub model: String,
    /// Grid file to write.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Score raw predictions instead of median-aligning them to the ground truth.
    #[arg(long)]
    pub no_median_scaling: bool,
    /// Depth range in millimeters, e.g. `--clamp 1,150`.
    #[arg(long, value_delimiter = ',', value_name = "MIN,MAX")]
    pub clamp: Option<Vec<f64>>,
    /// Divisor of 16-bit PNG depth values.
    #[arg(long, default_value_t = scopebench_core::dataset::DEFAULT_DEPTH_SCALE)]
    pub depth_scale: f64,
    /// File name template with a `{frame}` placeholder.
    #[arg(long, default_value = "{frame}.*")]
    pub naming: String,
    #[command(flatten)]
    pub filters: Filters,
    #[command(flatten)]
    pub workers: Workers,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Model grid files.
    #[arg(required = true, value_name = "GRID")]
    pub grids: Vec<PathBuf>,
    /// Baseline grid for the mCE section.
    #[arg(long, value_name = "GRID")]
    pub baseline: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Comma-separated subset of md, csv, json, txt.
    #[arg(long, value_delimiter = ',', default_value = "md,csv,json,txt")]
    pub formats: Vec<String>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Depth files to render one by one.
    #[arg(value_name = "DEPTH", conflicts_with = "strip")]
    pub depths: Vec<PathBuf>,
    /// Build `input | gt | predictions...` strips for every ground-truth frame.
    #[arg(long, requires = "gt_dir", requires = "image_dir")]
    pub strip: bool,
    /// Corrupted input images (strip mode).
    #[arg(long, value_name = "DIR")]
    pub image_dir: Option<PathBuf>,
    /// Ground-truth depth directory (strip mode).
    #[arg(long, value_name = "DIR")]
    pub gt_dir: Option<PathBuf>,
    /// Prediction directories, one panel each (strip mode).
    #[arg(long, value_name = "DIR")]
    pub pred_dir: Vec<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Fixed colormap range in millimeters, e.g. `--range 0,200`.
    #[arg(long, value_delimiter = ',', value_name = "MIN,MAX")]
    pub range: Option<Vec<f64>>,
    #[arg(long, default_value_t = scopebench_core::dataset::DEFAULT_DEPTH_SCALE)]
    pub depth_scale: f64,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    /// Write to a file instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
