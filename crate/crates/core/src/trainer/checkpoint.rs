//! Model checkpoints.
//!
//! A checkpoint is a directory holding `model.lshn`, `vocab.txt` and, when
//! written by the trainer, the `config.cfg` it was trained with.
//!
//! `model.lshn` layout, little-endian: magic `LSHN`, u32 version, seven u32
//! header fields (D_c, D_w, D_s, q, q_att, strategy code, strategy k), then
//! every tensor of [`Model`] in its `tensors()` order as f64: `t_v`, `t_s`,
//! the clip encoder (forward cell, backward cell, attention), the segment
//! encoder (same order), the bridge, the decoder cell and the emission layer.
//! Cell tensors are `w_input`, `w_hidden`, `bias`; attention tensors are
//! `proj`, `bias`, `query`. Matrices are row-major.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::TrainingConfig;
use super::model::{Model, ModelDims};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::han::Strategy;
use crate::params::ParamSet;

pub const MODEL_MAGIC: &[u8; 4] = b"LSHN";
pub const MODEL_VERSION: u32 = 1;
pub const MODEL_FILE: &str = "model.lshn";
pub const VOCAB_FILE: &str = "vocab.txt";
pub const CONFIG_FILE: &str = "config.cfg";

pub fn model_to_bytes(model: &Model) -> Vec<u8> {
    let d = model.dims();
    let (code, k) = model.strategy.code();
    let mut buf = Vec::with_capacity(36 + 8 * model.num_params());
    buf.extend_from_slice(MODEL_MAGIC);
    for v in [MODEL_VERSION, d.feature as u32, d.vocab as u32, d.latent as u32]
        .into_iter()
        .chain([d.hidden as u32, d.attention as u32, code, k])
    {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for (_, t) in model.tensors() {
        for x in t {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    buf
}

pub fn model_from_bytes(bytes: &[u8], path: &Path) -> Result<Model> {
    let bad = |msg: String| Error::format(path, msg);
    if bytes.len() < 36 || &bytes[..4] != MODEL_MAGIC {
        return Err(bad("not a model file".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    if word(0) != MODEL_VERSION {
        return Err(bad(format!("unsupported model version {}", word(0))));
    }
    let header: Vec<usize> = (1..6).map(|i| word(i) as usize).collect();
    if header.contains(&0) {
        return Err(bad("zero dimension in header".into()));
    }
    let dims = ModelDims {
        feature: header[0],
        vocab: header[1],
        latent: header[2],
        hidden: header[3],
        attention: header[4],
    };
    let strategy = Strategy::from_code(word(6), word(7)).map_err(|e| bad(e.to_string()))?;
    let mut model = Model::zeros(dims, strategy);
    let body = &bytes[36..];
    if body.len() != 8 * model.num_params() {
        return Err(bad(format!(
            "expected {} parameters, found {} bytes",
            model.num_params(),
            body.len()
        )));
    }
    let values: Vec<f64> =
        body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if values.iter().any(|x| !x.is_finite()) {
        return Err(bad("non-finite parameter".into()));
    }
    model.assign_flat(&values);
    Ok(model)
}

/// A loaded checkpoint directory.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: Model,
    pub vocab: Vocabulary,
    pub config: Option<TrainingConfig>,
}

pub fn save_checkpoint(
    dir: &Path,
    model: &Model,
    vocab: &Vocabulary,
    config: Option<&TrainingConfig>,
) -> Result<PathBuf> {
    if vocab.len() != model.dims().vocab {
        return Err(Error::Shape(format!(
            "vocabulary has {} words, model expects {}",
            vocab.len(),
            model.dims().vocab
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(MODEL_FILE);
    fs::write(&path, model_to_bytes(model)).map_err(|e| Error::io(&path, e))?;
    vocab.write(&dir.join(VOCAB_FILE))?;
    if let Some(cfg) = config {
        cfg.write(&dir.join(CONFIG_FILE))?;
    }
    Ok(dir.to_path_buf())
}

pub fn load_checkpoint(dir: &Path) -> Result<Checkpoint> {
    let path = dir.join(MODEL_FILE);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let model = model_from_bytes(&bytes, &path)?;
    let vocab_path = dir.join(VOCAB_FILE);
    let vocab = Vocabulary::read(&vocab_path)?;
    if vocab.len() != model.dims().vocab {
        return Err(Error::format(
            &vocab_path,
            format!("{} words, model expects {}", vocab.len(), model.dims().vocab),
        ));
    }
    let cfg_path = dir.join(CONFIG_FILE);
    let config = if cfg_path.exists() { Some(TrainingConfig::read(&cfg_path)?) } else { None };
    Ok(Checkpoint { model, vocab, config })
}
