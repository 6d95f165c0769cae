//! Training configuration and its `key = value` file format.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::han::Strategy;

/// Hyperparameters of a training run. Defaults not fixed by the method
/// (schedule, epochs, sizes) were chosen on the synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    /// Weight of the relevance loss; the coherence loss gets `1 - lambda1`.
    pub lambda1: f64,
    /// Weight of the squared-norm penalty over all parameters.
    pub lambda2: f64,
    pub learning_rate: f64,
    pub decay_factor: f64,
    /// Epochs between multiplicative learning-rate decays.
    pub decay_interval: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub latent_dim: usize,
    pub hidden_dim: usize,
    pub attention_dim: usize,
    pub strategy: Strategy,
    pub windowed: bool,
    /// Write a checkpoint every this many epochs; 0 writes only the final one.
    pub checkpoint_every: usize,
    /// Global gradient norm ceiling; 0 disables clipping.
    pub clip_norm: f64,
    pub threads: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.6,
            lambda2: 0.0002,
            learning_rate: 0.05,
            decay_factor: 0.5,
            decay_interval: 20,
            epochs: 60,
            batch_size: 8,
            seed: 1,
            latent_dim: 16,
            hidden_dim: 16,
            attention_dim: 16,
            strategy: Strategy::default(),
            windowed: true,
            checkpoint_every: 0,
            clip_norm: 5.0,
            threads: 1,
        }
    }
}

/// Every key accepted in a config file, in the order they are written.
pub const CONFIG_KEYS: &[&str] = &[
    "lambda1",
    "lambda2",
    "learning_rate",
    "decay_factor",
    "decay_interval",
    "epochs",
    "batch_size",
    "seed",
    "latent_dim",
    "hidden_dim",
    "attention_dim",
    "strategy",
    "windowed",
    "checkpoint_every",
    "clip_norm",
    "threads",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Config(format!("{key}: cannot parse {value:?}: {e}")))
}

impl TrainingConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "lambda1" => self.lambda1 = parse(key, value)?,
            "lambda2" => self.lambda2 = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "decay_factor" => self.decay_factor = parse(key, value)?,
            "decay_interval" => self.decay_interval = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "latent_dim" => self.latent_dim = parse(key, value)?,
            "hidden_dim" => self.hidden_dim = parse(key, value)?,
            "attention_dim" => self.attention_dim = parse(key, value)?,
            "strategy" => self.strategy = parse(key, value)?,
            "windowed" => self.windowed = parse(key, value)?,
            "checkpoint_every" => self.checkpoint_every = parse(key, value)?,
            "clip_norm" => self.clip_norm = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// The textual value of every key, in [`CONFIG_KEYS`] order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let values = [
            self.lambda1.to_string(),
            self.lambda2.to_string(),
            self.learning_rate.to_string(),
            self.decay_factor.to_string(),
            self.decay_interval.to_string(),
            self.epochs.to_string(),
            self.batch_size.to_string(),
            self.seed.to_string(),
            self.latent_dim.to_string(),
            self.hidden_dim.to_string(),
            self.attention_dim.to_string(),
            self.strategy.to_string(),
            self.windowed.to_string(),
            self.checkpoint_every.to_string(),
            self.clip_norm.to_string(),
            self.threads.to_string(),
        ];
        CONFIG_KEYS.iter().copied().zip(values).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(0.0..=1.0).contains(&self.lambda1) {
            return bad("lambda1 must lie in [0, 1]");
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return bad("lambda2 must be a finite non-negative number");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be a finite non-negative number");
        }
        if !(self.decay_factor > 0.0 && self.decay_factor.is_finite()) {
            return bad("decay_factor must be positive");
        }
        if self.decay_interval == 0 || self.batch_size == 0 || self.threads == 0 {
            return bad("decay_interval, batch_size and threads must be positive");
        }
        if self.latent_dim == 0 || self.hidden_dim == 0 || self.attention_dim == 0 {
            return bad("latent_dim, hidden_dim and attention_dim must be positive");
        }
        if !(self.clip_norm >= 0.0) {
            return bad("clip_norm must be non-negative");
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch` (0-based).
    pub fn rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate * self.decay_factor.powi((epoch / self.decay_interval) as i32)
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are ignored;
    /// keys not listed override nothing.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(key.trim(), value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text).map_err(|e| match e {
            Error::Config(msg) => Error::format(path, msg),
            other => other,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
