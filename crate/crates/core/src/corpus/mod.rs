//! Vocabulary, dataset formats, clip windowing and the synthetic generator.

mod dataset;
mod synthetic;
mod vocab;
mod window;

pub use dataset::{
    load_dataset, ClipFeatureSequence, Dataset, Instance, Manifest, Sentence, Split,
    FEATURE_MAGIC, FEATURE_VERSION,
};
pub use synthetic::{generate_synthetic, generate_synthetic_splits, SyntheticConfig, SyntheticCorpus};
pub use vocab::{OneHotVector, Vocabulary, END, END_TOKEN, START, START_TOKEN};
pub use window::{window_clips, window_starts};
