use std::fmt::Write as _;
use std::path::PathBuf;

use lshan::latent_space::Relevance;
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
    /// Align over the full grid instead of the banded windows.
    #[arg(long)]
    pub unwindowed: bool,
    /// Output CSV: instance_id, clip_index, word_index.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

pub fn run(args: Args) -> CliResult {
    let ck = load_checkpoint(&args.model)?;
    let data = load_split(&args.data, args.split, Some(&ck.vocab))?;
    let mut csv = String::from("instance_id,clip_index,word_index\n");
    let mut total = 0.0;
    for inst in &data.instances {
        let r = Relevance::compute(&inst.clips, &inst.sentence, &ck.model.latent, !args.unwindowed)?;
        total += r.loss();
        for &(i, j) in r.path.cells() {
            let _ = writeln!(csv, "{},{i},{j}", inst.id);
        }
    }
    write_file(&args.out, &csv)?;
    write_run_manifest(&args.out, "align", &args, None)?;
    println!(
        "aligned {} instances; mean DTW distance {:.4}; wrote {}",
        data.len(),
        total / data.len() as f64,
        args.out.display()
    );
    Ok(())
}
