use std::path::PathBuf;

use lshan::eval::evaluate_with;
use lshan::han::Strategy;
use lshan::trainer::load_checkpoint;
use lshan::Split;
use serde::Serialize;

use crate::common::{load_split, write_file, write_run_manifest, CliResult};

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Checkpoint directory.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = Split::Test)]
    pub split: Split,
    /// Segmentation used when encoding; defaults to the model's own.
    #[arg(long)]
    #[serde(serialize_with = "crate::commands::eval::display_opt")]
    pub strategy: Option<Strategy>,
    /// Decode at most this many words; defaults to the clip count.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Per-instance CSV report.
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

pub(crate) fn display_opt<S: serde::Serializer>(
    v: &Option<Strategy>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

pub fn run(args: Args) -> CliResult {
    let ck = load_checkpoint(&args.model)?;
    let data = load_split(&args.data, args.split, Some(&ck.vocab))?;
    let strategy = args.strategy.unwrap_or(ck.model.strategy);
    let report = evaluate_with(&ck.model, &data, strategy, args.max_len)?;
    println!("split: {}  instances: {}  strategy: {strategy}", args.split, data.len());
    println!("mean accuracy: {:.4}", report.mean_accuracy);
    let p = &report.pooled;
    println!(
        "pooled accuracy: {:.4}  (S={} I={} D={} N={})",
        report.pooled_accuracy(),
        p.substitutions,
        p.insertions,
        p.deletions,
        p.reference_len
    );
    println!("decode time: {:.3}s", report.decode_seconds);
    if let Some(path) = &args.report {
        write_file(path, &report.to_csv())?;
        write_run_manifest(path, "eval", &args, None)?;
    }
    Ok(())
}
