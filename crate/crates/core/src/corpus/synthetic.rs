//! Toy corpus with known word-to-clip alignment.
//!
//! Every word owns a fixed prototype feature vector. A sentence is a uniform
//! random word sequence, and each word contributes a run of consecutive clips
//! equal to its prototype plus Gaussian noise.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::{ClipFeatureSequence, Dataset, Instance, Sentence, Split};
use super::vocab::{Vocabulary, END_TOKEN, START_TOKEN};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Number of corpus words, not counting `#Start`/`#End`.
    pub vocab_size: usize,
    /// Intrinsic dimension of the prototypes before they are lifted into
    /// feature space.
    pub latent_dim: usize,
    pub feature_dim: usize,
    pub clips_per_word: (usize, usize),
    pub noise_std: f64,
    pub sentence_len: (usize, usize),
    pub instances: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            vocab_size: 20,
            latent_dim: 16,
            feature_dim: 16,
            clips_per_word: (2, 4),
            noise_std: 0.1,
            sentence_len: (3, 7),
            instances: 50,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("vocab_size", self.vocab_size),
            ("latent_dim", self.latent_dim),
            ("feature_dim", self.feature_dim),
            ("instances", self.instances),
            ("clips_per_word min", self.clips_per_word.0),
            ("sentence_len min", self.sentence_len.0),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.clips_per_word.0 > self.clips_per_word.1 {
            return Err(Error::Config("clips_per_word range is empty".into()));
        }
        if self.sentence_len.0 > self.sentence_len.1 {
            return Err(Error::Config("sentence_len range is empty".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config("noise_std must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn vocabulary(&self) -> Vocabulary {
        let width = self.vocab_size.saturating_sub(1).to_string().len().max(2);
        let mut words = vec![START_TOKEN.to_string(), END_TOKEN.to_string()];
        words.extend((0..self.vocab_size).map(|i| format!("w{i:0width$}")));
        Vocabulary::from_words(&words).expect("generated words are unique")
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    /// One row per vocabulary entry; the reserved rows are zero.
    pub prototypes: Array2<f64>,
}

/// Generates `cfg.instances` training instances.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Dataset> {
    Ok(generate_synthetic_splits(cfg, 0, 0)?.train)
}

/// Generates train, validation and test splits that share one set of
/// prototypes. The train split is identical to [`generate_synthetic`]'s.
pub fn generate_synthetic_splits(
    cfg: &SyntheticConfig,
    validation: usize,
    test: usize,
) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = cfg.vocabulary();
    let prototypes = draw_prototypes(cfg, &mut rng);
    let noise = Normal::new(0.0, cfg.noise_std).expect("validated noise");

    let mut make = |split: Split, count: usize| -> Result<Dataset> {
        let instances = (0..count)
            .map(|i| {
                draw_instance(cfg, &prototypes, &noise, &mut rng, format!("{split}-{i:04}"))
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(instances, vocab.clone(), split)
    };
    let train = make(Split::Train, cfg.instances)?;
    let validation = make(Split::Validation, validation)?;
    let test = make(Split::Test, test)?;
    Ok(SyntheticCorpus { train, validation, test, prototypes })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn draw_prototypes(cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let lift_scale = (1.0 / cfg.latent_dim as f64).sqrt();
    let lift = Array2::from_shape_simple_fn((cfg.feature_dim, cfg.latent_dim), || {
        lift_scale * normal(rng)
    });
    let mut prototypes = Array2::zeros((cfg.vocab_size + 2, cfg.feature_dim));
    for mut row in prototypes.axis_iter_mut(Axis(0)).skip(2) {
        let code = ndarray::Array1::from_shape_simple_fn(cfg.latent_dim, || normal(rng));
        row.assign(&lift.dot(&code).mapv(|x| x as f32 as f64));
    }
    prototypes
}

fn draw_instance(
    cfg: &SyntheticConfig,
    prototypes: &Array2<f64>,
    noise: &Normal<f64>,
    rng: &mut ChaCha8Rng,
    id: String,
) -> Result<Instance> {
    let m = rng.random_range(cfg.sentence_len.0..=cfg.sentence_len.1);
    let words: Vec<usize> = (0..m).map(|_| rng.random_range(2..cfg.vocab_size + 2)).collect();
    let mut rows = Vec::new();
    let mut alignment = Vec::new();
    for (pos, &w) in words.iter().enumerate() {
        let k = rng.random_range(cfg.clips_per_word.0..=cfg.clips_per_word.1);
        for _ in 0..k {
            for &p in prototypes.row(w).iter() {
                let x = if cfg.noise_std > 0.0 { p + noise.sample(rng) } else { p };
                rows.push(x as f32 as f64);
            }
            alignment.push(pos);
        }
    }
    let clips = Array2::from_shape_vec((alignment.len(), cfg.feature_dim), rows)
        .expect("row count matches alignment");
    let mut inst = Instance::new(id, ClipFeatureSequence::new(clips)?, Sentence::new(words)?)?;
    inst.alignment = Some(alignment);
    Ok(inst)
}
