//! Mini-batch SGD over a dataset with per-epoch shuffling, step decay,
//! global-norm clipping, loss history and periodic checkpoints.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checkpoint::save_checkpoint;
use super::config::TrainingConfig;
use super::model::{Model, ModelDims};
use super::objective::{joint_grad, LossParts};
use super::sgd::{clip_global_norm, sgd_step};
use crate::corpus::{Dataset, Instance};
use crate::error::{Error, Result};

pub const LOG_FILE: &str = "train_log.csv";

/// Losses of one epoch, averaged over its batches (each batch's losses are
/// taken before its update).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub relevance: f64,
    pub coherence: f64,
    pub regularizer: f64,
    pub total: f64,
    pub wall_seconds: f64,
}

impl EpochRecord {
    /// Equality ignoring the wall-clock column.
    pub fn same_losses(&self, other: &Self) -> bool {
        (self.epoch, self.relevance, self.coherence, self.regularizer, self.total)
            == (other.epoch, other.relevance, other.coherence, other.regularizer, other.total)
    }
}

#[derive(Debug, Clone)]
pub struct TrainState {
    pub model: Model,
    /// Completed epochs.
    pub epoch: usize,
    pub history: Vec<EpochRecord>,
    pub rng: ChaCha8Rng,
}

impl TrainState {
    /// Fresh parameters drawn from the seeded generator.
    pub fn new(dataset: &Dataset, cfg: &TrainingConfig) -> Result<Self> {
        cfg.validate()?;
        let feature = dataset.feature_dim().ok_or(Error::EmptyCorpus)?;
        let dims = ModelDims {
            feature,
            vocab: dataset.vocab.len(),
            latent: cfg.latent_dim,
            hidden: cfg.hidden_dim,
            attention: cfg.attention_dim,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let model = Model::init(dims, cfg.strategy, &mut rng);
        Ok(Self { model, epoch: 0, history: Vec::new(), rng })
    }
}

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,rel_loss,coh_loss,reg,total,wall_seconds\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.3}",
            r.epoch, r.relevance, r.coherence, r.regularizer, r.total, r.wall_seconds
        );
    }
    out
}

/// Where and how often the training loop writes its outputs.
#[derive(Debug, Clone, Default)]
pub struct TrainOutput {
    /// Directory receiving `train_log.csv`, `epoch-NNNN/` checkpoints and
    /// `final/`. Nothing is written when `None`.
    pub dir: Option<PathBuf>,
}

pub fn train(dataset: &Dataset, cfg: &TrainingConfig) -> Result<TrainState> {
    train_with(dataset, cfg, &TrainOutput::default(), &mut |_| {})
}

/// Runs `cfg.epochs` epochs from a freshly initialized model.
pub fn train_with(
    dataset: &Dataset,
    cfg: &TrainingConfig,
    output: &TrainOutput,
    on_epoch: &mut dyn FnMut(&EpochRecord),
) -> Result<TrainState> {
    if dataset.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut state = TrainState::new(dataset, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut last_good: Option<PathBuf> = None;
    if let Some(dir) = &output.dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    while state.epoch < cfg.epochs {
        let started = Instant::now();
        let epoch = state.epoch;
        let rate = cfg.rate_at(epoch);
        order.shuffle(&mut state.rng);
        let (mut rel, mut coh, mut reg) = (0.0, 0.0, 0.0);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Instance> = chunk.iter().map(|&i| &dataset.instances[i]).collect();
            let step = pool.install(|| joint_grad(&batch, &state.model, cfg)).and_then(
                |(parts, mut grad)| {
                    if !parts.total.is_finite() {
                        return Err(Error::NonFinite("loss".into()));
                    }
                    clip_global_norm(&mut grad, cfg.clip_norm);
                    sgd_step(&mut state.model, &grad, rate)?;
                    Ok(parts)
                },
            );
            let parts = step.map_err(|e| match e {
                Error::NonFinite(what) => Error::Diverged {
                    epoch: epoch + 1,
                    message: format!(
                        "non-finite {what}; last good checkpoint: {}",
                        last_good
                            .as_ref()
                            .map_or("none".to_string(), |p| p.display().to_string())
                    ),
                },
                other => other,
            })?;
            let w = batch.len() as f64;
            rel += w * parts.relevance;
            coh += w * parts.coherence;
            reg += w * parts.regularizer;
        }
        let n = dataset.len() as f64;
        let parts = LossParts::combine(rel / n, coh / n, reg / n, cfg);
        state.epoch += 1;
        let record = EpochRecord {
            epoch: state.epoch,
            relevance: parts.relevance,
            coherence: parts.coherence,
            regularizer: parts.regularizer,
            total: parts.total,
            wall_seconds: started.elapsed().as_secs_f64(),
        };
        state.history.push(record);
        on_epoch(&record);

        if let Some(dir) = &output.dir {
            write_log(dir, &state.history)?;
            if cfg.checkpoint_every > 0 && state.epoch % cfg.checkpoint_every == 0 {
                let path = dir.join(format!("epoch-{:04}", state.epoch));
                save_checkpoint(&path, &state.model, &dataset.vocab, Some(cfg))?;
                last_good = Some(path);
            }
        }
    }
    if let Some(dir) = &output.dir {
        write_log(dir, &state.history)?;
        save_checkpoint(&dir.join("final"), &state.model, &dataset.vocab, Some(cfg))?;
    }
    Ok(state)
}

fn write_log(dir: &Path, history: &[EpochRecord]) -> Result<()> {
    let path = dir.join(LOG_FILE);
    fs::write(&path, history_csv(history)).map_err(|e| Error::io(&path, e))
}
