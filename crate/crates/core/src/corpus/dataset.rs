//! In-memory dataset types and their on-disk formats.
//!
//! A dataset on disk is a JSON manifest pointing at one binary feature file
//! per instance and a single annotation file with one sentence per line:
//!
//! ```text
//! {"features": ["features/train/000.lshf", ...], "annotations": "train.txt", "split": "train"}
//! ```
//!
//! Relative paths are resolved against the manifest's directory. Feature
//! files are little-endian: the magic `LSHF`, `u32` version (1), `u32` clip
//! count, `u32` feature dimension, then the clip rows as `f32`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use super::vocab::{Vocabulary, END, START};
use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"LSHF";
pub const FEATURE_VERSION: u32 = 1;

/// One video as a sequence of clip feature vectors, one row per clip.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipFeatureSequence {
    clips: Array2<f64>,
}

impl ClipFeatureSequence {
    pub fn new(clips: Array2<f64>) -> Result<Self> {
        if clips.nrows() == 0 || clips.ncols() == 0 {
            return Err(Error::Shape("clip sequence must be non-empty".into()));
        }
        if !clips.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("clip features".into()));
        }
        Ok(Self { clips })
    }

    pub fn len(&self) -> usize {
        self.clips.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.clips.ncols()
    }

    pub fn clip(&self, i: usize) -> ArrayView1<'_, f64> {
        self.clips.row(i)
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.clips
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(16 + 4 * self.clips.len());
        buf.extend_from_slice(FEATURE_MAGIC);
        buf.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.len() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        for &x in self.clips.iter() {
            buf.extend_from_slice(&(x as f32).to_le_bytes());
        }
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() < 16 || &bytes[..4] != FEATURE_MAGIC {
            return Err(Error::format(path, "not a feature file"));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        if word(4) != FEATURE_VERSION {
            return Err(Error::format(path, format!("unsupported version {}", word(4))));
        }
        let (n, dim) = (word(8) as usize, word(12) as usize);
        if bytes.len() != 16 + 4 * n * dim {
            return Err(Error::format(path, "truncated or oversized feature payload"));
        }
        let values: Vec<f64> = bytes[16..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        let clips = Array2::from_shape_vec((n, dim), values)
            .map_err(|e| Error::format(path, e.to_string()))?;
        Self::new(clips).map_err(|e| Error::format(path, e.to_string()))
    }
}

/// Word indices of an annotated sentence, without start/end symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence(Vec<usize>);

impl Sentence {
    pub fn new(tokens: Vec<usize>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Shape("sentence must contain at least one word".into()));
        }
        Ok(Self(tokens))
    }

    pub fn tokens(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn validate(&self, vocab: &Vocabulary) -> Result<()> {
        for &t in &self.0 {
            if t >= vocab.len() {
                return Err(Error::IndexOutOfRange { index: t, size: vocab.len() });
            }
            if t == START || t == END {
                return Err(Error::InvalidVocabulary("reserved symbol inside sentence".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub clips: ClipFeatureSequence,
    pub sentence: Sentence,
    /// Generator ground truth: sentence position of each clip.
    pub alignment: Option<Vec<usize>>,
}

impl Instance {
    pub fn new(id: impl Into<String>, clips: ClipFeatureSequence, sentence: Sentence) -> Result<Self> {
        let id = id.into();
        if clips.len() < sentence.len() {
            return Err(Error::TooFewClips { id, clips: clips.len(), words: sentence.len() });
        }
        Ok(Self { id, clips, sentence, alignment: None })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "validation" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::Config(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub vocab: Vocabulary,
    pub split: Split,
}

impl Dataset {
    pub fn new(instances: Vec<Instance>, vocab: Vocabulary, split: Split) -> Result<Self> {
        let dim = instances.first().map(|i| i.clips.dim());
        for inst in &instances {
            inst.sentence.validate(&vocab)?;
            if Some(inst.clips.dim()) != dim {
                return Err(Error::Shape(format!(
                    "instance {}: feature dimension {} differs from {}",
                    inst.id,
                    inst.clips.dim(),
                    dim.unwrap()
                )));
            }
        }
        Ok(Self { instances, vocab, split })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Feature dimension shared by every instance.
    pub fn feature_dim(&self) -> Option<usize> {
        self.instances.first().map(|i| i.clips.dim())
    }

    /// Writes features, annotations and manifest under `dir`; returns the
    /// manifest path (`dir/<split>.json`).
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let split = self.split.as_str();
        let feature_dir = dir.join("features").join(split);
        fs::create_dir_all(&feature_dir).map_err(|e| Error::io(&feature_dir, e))?;
        let mut features = Vec::with_capacity(self.len());
        let mut annotations = String::new();
        for inst in &self.instances {
            let rel = format!("features/{split}/{}.lshf", inst.id);
            inst.clips.write(&dir.join(&rel))?;
            features.push(rel);
            annotations.push_str(&self.vocab.decode(inst.sentence.tokens()).join(" "));
            annotations.push('\n');
        }
        let annotation_rel = format!("{split}.txt");
        let annotation_path = dir.join(&annotation_rel);
        fs::write(&annotation_path, annotations).map_err(|e| Error::io(&annotation_path, e))?;
        let manifest = Manifest { features, annotations: annotation_rel, split: self.split };
        let manifest_path = dir.join(format!("{split}.json"));
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;
        Ok(manifest_path)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub features: Vec<String>,
    pub annotations: String,
    pub split: Split,
}

/// Loads a dataset from its manifest. Builds the vocabulary from the
/// annotations unless one is supplied.
pub fn load_dataset(manifest_path: &Path, vocab: Option<&Vocabulary>) -> Result<Dataset> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::format(manifest_path, e.to_string()))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let annotation_path = base.join(&manifest.annotations);
    let annotations =
        fs::read_to_string(&annotation_path).map_err(|e| Error::io(&annotation_path, e))?;
    let sentences: Vec<Vec<&str>> =
        annotations.lines().map(|l| l.split(' ').filter(|t| !t.is_empty()).collect()).collect();
    if sentences.len() != manifest.features.len() {
        return Err(Error::format(
            &annotation_path,
            format!(
                "{} annotation lines for {} feature files",
                sentences.len(),
                manifest.features.len()
            ),
        ));
    }

    let vocab = match vocab {
        Some(v) => v.clone(),
        None => Vocabulary::build(&sentences)?,
    };

    let mut instances = Vec::with_capacity(sentences.len());
    let mut dim = None;
    for (rel, tokens) in manifest.features.iter().zip(&sentences) {
        let path = base.join(rel);
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or(rel).to_string();
        let clips = ClipFeatureSequence::read(&path)?;
        match dim {
            None => dim = Some(clips.dim()),
            Some(d) if d != clips.dim() => {
                return Err(Error::format(
                    &path,
                    format!("feature dimension {} differs from {d}", clips.dim()),
                ))
            }
            _ => {}
        }
        let sentence = Sentence::new(vocab.encode(tokens)?)
            .map_err(|e| Error::format(&annotation_path, format!("instance {id}: {e}")))?;
        instances.push(Instance::new(id, clips, sentence)?);
    }
    Dataset::new(instances, vocab, manifest.split)
}
