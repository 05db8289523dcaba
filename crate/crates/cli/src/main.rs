mod args;
mod commands;
mod inputs;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Bad arguments or unusable input files; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<peakprint::Error>() {
            return if e.is_usage() { 2 } else { 1 };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()?;
    }
    let format = cli.format;
    match cli.command {
        Command::PredictPeaks(a) => commands::predict_peaks(a, format),
        Command::Simulate(a) => commands::simulate(a),
        Command::Fingerprint(a) => commands::fingerprint(a),
        Command::Train(a) => commands::train(a, format),
        Command::Classify(a) => commands::classify(a, format),
        Command::Eval(a) => commands::eval(a, format),
        Command::GenData(a) => commands::gen_data(a),
        Command::ExportWeights(a) => commands::export_weights(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level.filter())
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
