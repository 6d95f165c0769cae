use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use lshan::corpus::load_dataset;
use lshan::han::Strategy;
use lshan::{Dataset, Split, TrainingConfig, Vocabulary};
use serde::Serialize;
use serde_json::{json, Map, Value};

pub type CliError = anyhow::Error;
pub type CliResult<T = ()> = Result<T, CliError>;

/// Bad flag combinations detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

/// A check that ran to completion and failed numerically.
#[derive(Debug)]
pub struct NumericFailure(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

impl std::fmt::Display for NumericFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericFailure {}

/// 1 usage, 2 data, 3 numeric.
pub fn exit_code(e: &CliError) -> u8 {
    if e.downcast_ref::<UsageError>().is_some() {
        1
    } else if e.downcast_ref::<NumericFailure>().is_some() {
        3
    } else if let Some(err) = e.downcast_ref::<lshan::Error>() {
        match err {
            lshan::Error::Config(_) => 1,
            err if err.is_numeric() => 3,
            _ => 2,
        }
    } else {
        2
    }
}

/// One flag per training configuration key; each overrides the config file.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ConfigFlags {
    /// `key = value` file; flags given alongside override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Weight of the relevance loss in [0, 1].
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Weight of the squared-norm penalty.
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub decay_factor: Option<f64>,
    /// Epochs between learning-rate decays.
    #[arg(long)]
    pub decay_interval: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    #[arg(long)]
    pub attention_dim: Option<usize>,
    /// two_split, pair_split or even_k:K.
    #[arg(long)]
    #[serde(serialize_with = "display_opt")]
    pub strategy: Option<Strategy>,
    /// Restrict DTW to the banded windows (true/false).
    #[arg(long)]
    pub windowed: Option<bool>,
    /// Checkpoint every N epochs; 0 keeps only the final model.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Global gradient norm ceiling; 0 disables clipping.
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// Worker threads for per-instance gradients.
    #[arg(long)]
    pub threads: Option<usize>,
}

fn display_opt<S: serde::Serializer, T: std::fmt::Display>(
    v: &Option<T>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

impl ConfigFlags {
    pub fn resolve(&self) -> CliResult<TrainingConfig> {
        let mut cfg = match &self.config {
            Some(path) => TrainingConfig::read(path)?,
            None => TrainingConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(
            lambda1,
            lambda2,
            learning_rate,
            decay_factor,
            decay_interval,
            epochs,
            batch_size,
            seed,
            latent_dim,
            hidden_dim,
            attention_dim,
            strategy,
            windowed,
            checkpoint_every,
            clip_norm,
            threads
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn config_json(cfg: &TrainingConfig) -> Value {
    Value::Object(cfg.pairs().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect())
}

/// `--data` may name a corpus directory or a split manifest directly.
pub fn split_manifest(data: &Path, split: Split) -> PathBuf {
    if data.extension().is_some_and(|e| e == "json") {
        data.to_path_buf()
    } else {
        data.join(format!("{split}.json"))
    }
}

/// Loads a split, encoding words with `vocab` or else the corpus's own
/// `vocab.txt` when present.
pub fn load_split(data: &Path, split: Split, vocab: Option<&Vocabulary>) -> CliResult<Dataset> {
    let manifest = split_manifest(data, split);
    let corpus_vocab;
    let vocab = match vocab {
        Some(v) => Some(v),
        None => {
            let path = manifest.parent().unwrap_or(Path::new(".")).join("vocab.txt");
            if path.exists() {
                corpus_vocab = Vocabulary::read(&path)?;
                Some(&corpus_vocab)
            } else {
                None
            }
        }
    };
    let ds = load_dataset(&manifest, vocab)?;
    if ds.is_empty() {
        return Err(lshan::Error::EmptyCorpus).with_context(|| manifest.display().to_string());
    }
    Ok(ds)
}

pub const RUN_MANIFEST: &str = "run_manifest.json";

/// Where the manifest of an output goes: inside a directory output, or next
/// to a file output as `<file>.run_manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    if output.is_dir() {
        output.join(RUN_MANIFEST)
    } else {
        let mut name = output.file_name().unwrap_or_default().to_os_string();
        name.push(format!(".{RUN_MANIFEST}"));
        output.with_file_name(name)
    }
}

/// Writes the command, its options (output paths excluded), the resolved
/// training configuration if any, and the tool version. No timestamps, so
/// repeated runs produce identical files.
pub fn write_run_manifest(
    output: &Path,
    command: &str,
    options: &impl Serialize,
    config: Option<&TrainingConfig>,
) -> CliResult {
    let mut m = Map::new();
    m.insert("tool".into(), json!("lshan"));
    m.insert("version".into(), json!(lshan::VERSION));
    m.insert("command".into(), json!(command));
    m.insert("options".into(), serde_json::to_value(options)?);
    if let Some(cfg) = config {
        m.insert("seed".into(), json!(cfg.seed));
        m.insert("config".into(), config_json(cfg));
    }
    let path = manifest_path(output);
    let text = serde_json::to_string_pretty(&Value::Object(m))? + "\n";
    fs::write(&path, text).with_context(|| path.display().to_string())?;
    Ok(())
}

pub fn write_file(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
    }
    fs::write(path, text).with_context(|| path.display().to_string())
}
