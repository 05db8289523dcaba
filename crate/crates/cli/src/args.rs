use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "peakprint",
    version,
    about = "Predict, simulate and detect deconvolution spectral peaks in audio"
)]
pub struct Cli {
    /// Log verbosity.
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    pub log_level: LogLevel,

    /// Format of tables written to stdout or report files.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Worker threads for per-file work; all cores when unset.
    #[arg(long, global = true, env = "PEAKPRINT_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogLevel {
    Error,
    Warn,
    Info,
    Debug,
    Trace,
}

impl LogLevel {
    pub fn filter(self) -> log::LevelFilter {
        match self {
            LogLevel::Error => log::LevelFilter::Error,
            LogLevel::Warn => log::LevelFilter::Warn,
            LogLevel::Info => log::LevelFilter::Info,
            LogLevel::Debug => log::LevelFilter::Debug,
            LogLevel::Trace => log::LevelFilter::Trace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Predict the artifact peak comb of a stride schedule.
    PredictPeaks(PredictPeaksArgs),
    /// Run a deconvolution stack and write the averaged log spectrum of every stage.
    Simulate(SimulateArgs),
    /// Extract fingerprints from WAV files.
    Fingerprint(FingerprintArgs),
    /// Train a logistic-regression detector on fingerprints.
    Train(TrainArgs),
    /// Score audio or fingerprints with a trained detector.
    Classify(ClassifyArgs),
    /// Evaluate a detector on a labelled dataset.
    Eval(EvalArgs),
    /// Generate a synthetic real-vs-deconvolved dataset.
    GenData(GenDataArgs),
    /// Write a detector's weights as a frequency,weight table.
    ExportWeights(ExportWeightsArgs),
}

#[derive(Debug, Args)]
pub struct PredictPeaksArgs {
    /// Strides of the stack, first layer first.
    #[arg(value_name = "STRIDE")]
    pub strides: Vec<usize>,

    /// Use a named schedule instead of explicit strides (e.g. encodec48k).
    #[arg(long, conflicts_with = "strides")]
    pub preset: Option<String>,

    /// Output sample rate in Hz; adds absolute frequencies.
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Stack description (JSON with input_rate, activation and layers).
    #[arg(long, required_unless_present = "preset")]
    pub config: Option<PathBuf>,

    /// Random stack with a named stride schedule, used when no config is given.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,

    /// Deconvolution engine.
    #[arg(long, default_value = "direct")]
    pub engine: String,

    /// Latent input: "noise" or a WAV file resampled to the stack's input rate.
    #[arg(long, default_value = "noise")]
    pub latent: String,

    /// Output length in analysis frames.
    #[arg(long, default_value_t = 200)]
    pub frames: usize,

    /// Analysis frame length at the output rate; earlier stages use frames
    /// covering the same duration.
    #[arg(long, default_value_t = 8192)]
    pub frame_len: usize,

    /// Constant added to the standardized latent.
    #[arg(long, default_value_t = 1.0)]
    pub latent_offset: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory for layer_<i>.csv files and summary.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FingerprintArgs {
    /// Fingerprint settings (JSON); defaults depend on each file's sample rate.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// A WAV file, a directory of WAV files or a manifest (.jsonl).
    #[arg(long = "in")]
    pub input: PathBuf,

    /// Output: .csv for a single file, otherwise JSON lines.
    #[arg(long)]
    pub out: PathBuf,

    /// Label for inputs that are not read from a manifest.
    #[arg(long, default_value = "unlabeled")]
    pub label: String,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Fingerprint JSON lines.
    #[arg(long)]
    pub data: PathBuf,

    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,

    #[arg(long, default_value_t = 500)]
    pub epochs: usize,

    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,

    /// Stop when an epoch lowers the loss by less than this.
    #[arg(long, default_value_t = 1e-7)]
    pub tolerance: f64,

    /// Seed for the holdout split.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Fraction of each class held out and evaluated after training.
    #[arg(long, default_value_t = 0.0)]
    pub holdout: f64,

    /// Where to write the holdout report; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// A WAV file, a directory of WAV files, a manifest or fingerprint JSON lines.
    #[arg(long = "in")]
    pub input: PathBuf,

    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// Fingerprint JSON lines or a manifest of labelled WAV files.
    #[arg(long)]
    pub data: PathBuf,

    /// Grouping of the per-class breakdown; only "label" is supported.
    #[arg(long, default_value = "label")]
    pub breakdown_by: String,

    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,

    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Dataset description (JSON).
    #[arg(long)]
    pub spec: PathBuf,

    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExportWeightsArgs {
    #[arg(long)]
    pub model: PathBuf,

    /// CSV file to write.
    #[arg(long)]
    pub out: PathBuf,
}
