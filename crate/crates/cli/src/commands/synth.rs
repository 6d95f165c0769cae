use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::Context;
use lshan::corpus::{generate_synthetic_splits, SyntheticConfig};
use serde::Serialize;

use crate::common::{write_file, write_run_manifest, CliResult};

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// Output corpus directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Corpus words, not counting the two reserved symbols.
    #[arg(long, default_value_t = 20)]
    pub vocab_size: usize,
    /// Training instances.
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    #[arg(long, default_value_t = 20)]
    pub validation: usize,
    #[arg(long, default_value_t = 20)]
    pub test: usize,
    /// Clip feature dimension.
    #[arg(long, default_value_t = 16)]
    pub feature_dim: usize,
    /// Intrinsic dimension of the word prototypes.
    #[arg(long, default_value_t = 16)]
    pub prototype_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub min_words: usize,
    #[arg(long, default_value_t = 7)]
    pub max_words: usize,
    #[arg(long, default_value_t = 2)]
    pub min_clips_per_word: usize,
    #[arg(long, default_value_t = 4)]
    pub max_clips_per_word: usize,
    /// Standard deviation of the per-clip Gaussian noise.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
}

pub fn run(args: Args) -> CliResult {
    let cfg = SyntheticConfig {
        vocab_size: args.vocab_size,
        latent_dim: args.prototype_dim,
        feature_dim: args.feature_dim,
        clips_per_word: (args.min_clips_per_word, args.max_clips_per_word),
        noise_std: args.noise,
        sentence_len: (args.min_words, args.max_words),
        instances: args.instances,
        seed: args.seed,
    };
    let corpus = generate_synthetic_splits(&cfg, args.validation, args.test)?;
    let dir = &args.out;
    std::fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    corpus.train.vocab.write(&dir.join("vocab.txt"))?;

    let mut align = String::from("split,instance_id,clip_index,word_index\n");
    for ds in [&corpus.train, &corpus.validation, &corpus.test] {
        if ds.is_empty() {
            continue;
        }
        ds.write(dir)?;
        for inst in &ds.instances {
            for (clip, word) in inst.alignment.iter().flatten().enumerate() {
                let _ = writeln!(align, "{},{},{clip},{word}", ds.split, inst.id);
            }
        }
    }
    write_file(&dir.join("alignments.csv"), &align)?;
    write_run_manifest(dir, "synth", &args, None)?;
    println!(
        "wrote {} train / {} validation / {} test instances to {}",
        corpus.train.len(),
        corpus.validation.len(),
        corpus.test.len(),
        dir.display()
    );
    Ok(())
}
