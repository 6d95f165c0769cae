use std::path::PathBuf;

use lshan::trainer::{train_with, TrainOutput};
use lshan::Split;
use serde::Serialize;

use crate::common::{load_split, write_run_manifest, CliResult, ConfigFlags};

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Corpus directory or split manifest.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = Split::Train)]
    pub split: Split,
    /// Output directory for the log, checkpoints and `final/`.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Print one line per epoch.
    #[arg(long)]
    #[serde(skip)]
    pub verbose: bool,
    #[command(flatten)]
    pub config: ConfigFlags,
}

pub fn run(args: Args) -> CliResult {
    let cfg = args.config.resolve()?;
    let data = load_split(&args.data, args.split, None)?;
    let output = TrainOutput { dir: Some(args.out.clone()) };
    let verbose = args.verbose;
    let state = train_with(&data, &cfg, &output, &mut |r| {
        if verbose {
            println!(
                "epoch {:>4}  rel {:.4}  coh {:.4}  reg {:.2}  total {:.4}",
                r.epoch, r.relevance, r.coherence, r.regularizer, r.total
            );
        }
    })?;
    write_run_manifest(&args.out, "train", &args, Some(&cfg))?;
    if let Some(last) = state.history.last() {
        println!(
            "trained {} epochs on {} instances; final total loss {:.4}; model in {}",
            state.epoch,
            data.len(),
            last.total,
            args.out.join("final").display()
        );
    }
    Ok(())
}
