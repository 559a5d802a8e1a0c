//! `jtm`: encode skeleton sequences into joint trajectory maps, export
//! image datasets, fuse classifier scores and run the evaluation loop.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status 1: bad input data or a failing pipeline stage.
pub const EXIT_DATA: u8 = 1;
/// Exit status 2: bad flags, config or incompatible inputs.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl std::fmt::Display) -> Self {
        CliError::Data(msg.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "jtm",
    version,
    about = "Joint trajectory maps for skeleton action sequences"
)]
struct Cli {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render sequences to PNG maps plus a manifest.
    Encode(EncodeArgs),
    /// Render a corpus directory into a train/test image tree.
    Dataset(DatasetArgs),
    /// Combine score CSVs and predict.
    Fuse(FuseArgs),
    /// Compare fusion methods on a corpus.
    Eval(EvalArgs),
    /// Accuracy per encoding level.
    Ablate(AblateArgs),
    /// Accuracy per view of a rotation grid.
    Viewgrid(ViewgridArgs),
    /// Write a synthetic corpus directory.
    Synth(SynthArgs),
    /// Write a colormap table as CSV.
    Colormap(ColormapArgs),
}

/// Encoding and canvas options shared by the rendering commands.
#[derive(Debug, Args, Clone, Default)]
pub struct RenderOpts {
    /// raw, hue, hue_parts, hue_parts_sat, hue_parts_bri or full [default: full]
    #[arg(long)]
    pub level: Option<String>,
    /// Square canvas edge in pixels; sets width and height.
    #[arg(long)]
    pub size: Option<u32>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    /// Line width in pixels [default: 1]
    #[arg(long)]
    pub thickness: Option<u32>,
    /// Free border as a fraction of each canvas side [default: 0.05]
    #[arg(long)]
    pub margin: Option<f64>,
    /// jet, jet_reversed, grayscale or a 256-row r,g,b CSV file [default: jet]
    #[arg(long)]
    pub colormap: Option<String>,
    /// Joint partition file of `index part` lines [default: Kinect V1 20 joints]
    #[arg(long, value_name = "FILE")]
    pub partition: Option<PathBuf>,
    #[arg(long)]
    pub s_min: Option<f64>,
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub b_min: Option<f64>,
    #[arg(long)]
    pub b_max: Option<f64>,
}

/// Which synthetic corpus to build when no corpus directory is given.
#[derive(Debug, Args, Clone, Default)]
pub struct CorpusOpts {
    /// Corpus directory with corpus.jsonl; a synthetic corpus is generated otherwise.
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    /// standard (6 classes) or direction-magnitude (4 classes) [default: standard]
    #[arg(long)]
    pub set: Option<String>,
    /// Synthetic samples per class [default: 30]
    #[arg(long)]
    pub per_class: Option<usize>,
    /// [default: 2024]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise std in meters [default: 0.01]
    #[arg(long)]
    pub jitter: Option<f64>,
}

/// Classifier and protocol options of the evaluation commands.
#[derive(Debug, Args, Clone, Default)]
pub struct EvalOpts {
    /// Neighbours per class [default: 1]
    #[arg(long)]
    pub k: Option<usize>,
    /// Softmin temperature [default: 0.01]
    #[arg(long)]
    pub temperature: Option<f64>,
    /// parity or loso [default: parity]
    #[arg(long)]
    pub protocol: Option<String>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Sequence files (.jsonl canonical, anything else whitespace xyz).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
    /// front, top, side or all [default: all]
    #[arg(long)]
    pub plane: Option<String>,
    /// Polar view angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Azimuthal view angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<f64>,
    /// identity, default (28 views) or study (25 views); ignored with --theta/--psi
    #[arg(long)]
    pub views: Option<String>,
    /// Joints per frame for xyz input [default: 20]
    #[arg(long)]
    pub joints: Option<usize>,
    /// Class label written to the manifest [default: unknown]
    #[arg(long)]
    pub label: Option<String>,
    #[command(flatten)]
    pub render: RenderOpts,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Corpus directory with corpus.jsonl.
    pub corpus: PathBuf,
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
    /// identity, default (28 views) or study (25 views) [default: identity]
    #[arg(long)]
    pub views: Option<String>,
    /// parity or a split name that receives every sample [default: parity]
    #[arg(long)]
    pub split: Option<String>,
    /// front, top, side or all [default: all]
    #[arg(long)]
    pub plane: Option<String>,
    #[command(flatten)]
    pub render: RenderOpts,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Two or more score CSVs with identical headers and sample ids.
    #[arg(required = true, num_args = 2..)]
    pub inputs: Vec<PathBuf>,
    /// multiply, average or max [default: multiply]
    #[arg(long)]
    pub method: Option<String>,
    /// Fused score CSV; printed to stdout when absent.
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// CSV of sample_id,predicted.
    #[arg(long, value_name = "FILE")]
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Report CSV.
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Directory for front.csv, top.csv and side.csv score files.
    #[arg(long, value_name = "DIR")]
    pub scores: Option<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusOpts,
    #[command(flatten)]
    pub eval: EvalOpts,
    #[command(flatten)]
    pub render: RenderOpts,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Comma-separated levels [default: all six]
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusOpts,
    #[command(flatten)]
    pub eval: EvalOpts,
    #[command(flatten)]
    pub render: RenderOpts,
}

#[derive(Debug, Args)]
pub struct ViewgridArgs {
    /// Angle step in degrees for a symmetric grid [default: 22.5]
    #[arg(long)]
    pub step: Option<f64>,
    /// Both angles span [-range, range] [default: 45]
    #[arg(long)]
    pub range: Option<f64>,
    /// default or study; overrides --step/--range
    #[arg(long)]
    pub views: Option<String>,
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub corpus: CorpusOpts,
    #[command(flatten)]
    pub eval: EvalOpts,
    #[command(flatten)]
    pub render: RenderOpts,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, short, value_name = "DIR")]
    pub out: PathBuf,
    /// standard or direction-magnitude [default: standard]
    #[arg(long)]
    pub set: Option<String>,
    /// [default: 30]
    #[arg(long)]
    pub per_class: Option<usize>,
    /// [default: 2024]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise std in meters [default: 0.01]
    #[arg(long)]
    pub jitter: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ColormapArgs {
    /// jet, jet_reversed or grayscale [default: jet]
    #[arg(long)]
    pub name: Option<String>,
    /// Printed to stdout when absent.
    #[arg(long, short, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("JTM_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(format!("JTM_THREADS must be a positive integer, got {v:?}"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(p) => config::ConfigFile::load(p)?,
        None => config::ConfigFile::default(),
    };
    match cli.command {
        Command::Encode(a) => commands::encode(&cfg, a),
        Command::Dataset(a) => commands::dataset(&cfg, a),
        Command::Fuse(a) => commands::fuse(&cfg, a),
        Command::Eval(a) => commands::eval(&cfg, a),
        Command::Ablate(a) => commands::ablate(&cfg, a),
        Command::Viewgrid(a) => commands::viewgrid(&cfg, a),
        Command::Synth(a) => commands::synth(&cfg, a),
        Command::Colormap(a) => commands::colormap(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jtm: {e}");
            ExitCode::from(e.code())
        }
    }
}
