//! `lshan`: synthesize data, train, evaluate and run the diagnostic
//! experiments from the command line.

mod commands;
mod common;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::common::{exit_code, CliError};

#[derive(Debug, Parser)]
#[command(name = "lshan", version, about = "Continuous video-to-sentence recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with train, validation and test splits.
    Synth(commands::synth::Args),
    /// Train a model and write checkpoints and the loss log.
    Train(commands::train::Args),
    /// Greedy-decode a split and report accuracy.
    Eval(commands::eval::Args),
    /// Export DTW clip-to-word alignments as CSV.
    Align(commands::align::Args),
    /// Compare analytic gradients with central differences on a tiny model.
    Gradcheck(commands::gradcheck::Args),
    /// Correlate beam rank with latent-space DTW distance.
    Probe(commands::probe::Args),
    /// Retrain across trade-off weights or segmentation strategies.
    Sweep(commands::sweep::Args),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => commands::synth::run(a),
        Command::Train(a) => commands::train::run(a),
        Command::Eval(a) => commands::eval::run(a),
        Command::Align(a) => commands::align::run(a),
        Command::Gradcheck(a) => commands::gradcheck::run(a),
        Command::Probe(a) => commands::probe::run(a),
        Command::Sweep(a) => commands::sweep::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn one_line(e: &CliError) -> String {
    format!("{e:#}").replace('\n', " ")
}
