use std::path::PathBuf;

use lshan::eval::{consistency_probe, ProbeConfig};
use lshan::trainer::load_checkpoint;
use lshan::Split;
use serde::Serialize;

use crate::common::{load_split, write_file, write_run_manifest, CliResult};

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = Split::Train)]
    pub split: Split,
    /// Beam width.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Videos to sample.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Measure distances over the full grid instead of the banded windows.
    #[arg(long)]
    pub unwindowed: bool,
    /// CSV output: video_id, rank, log_prob, dtw_distance, tokens.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> CliResult {
    let ck = load_checkpoint(&args.model)?;
    let data = load_split(&args.data, args.split, Some(&ck.vocab))?;
    let cfg = ProbeConfig {
        k: args.k,
        sample_count: args.samples,
        seed: args.seed,
        windowed: !args.unwindowed,
        max_len: None,
    };
    let report = consistency_probe(&ck.model, &data, &cfg)?;
    for v in &report.videos {
        match v.correlation {
            Some(rho) => println!("{:<16} spearman {rho:+.3}  ({} hypotheses)", v.id, v.points.len()),
            None => println!("{:<16} skipped  ({} usable hypotheses)", v.id, v.points.len()),
        }
    }
    match report.mean_correlation {
        Some(m) => println!("mean spearman: {m:.4}  ({} reported, {} skipped)", report.reported, report.skipped),
        None => println!("mean spearman: undefined  ({} skipped)", report.skipped),
    }
    write_file(&args.out, &report.to_csv())?;
    write_run_manifest(&args.out, "probe", &args, None)?;
    Ok(())
}
