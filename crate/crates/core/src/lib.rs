//! Continuous sequence-to-sentence recognition with a jointly trained
//! video-sentence latent space and a hierarchical attention encoder-decoder.
//!
//! Clip feature sequences and one-hot sentences are projected into a shared
//! latent space where a monotone DTW distance measures their relevance. A
//! hierarchical attention network encodes the projected clips and decodes a
//! sentence word by word. Both parts are trained together by SGD on a
//! weighted sum of the two losses plus a ridge penalty.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod han;
pub mod latent_space;
pub mod params;
pub mod trainer;

pub use corpus::{ClipFeatureSequence, Dataset, Instance, Sentence, Split, Vocabulary};
pub use error::{Error, Result};
pub use han::{HanParams, Segmentation, Strategy};
pub use latent_space::LatentSpaceParams;
pub use params::ParamSet;
pub use trainer::{Model, TrainingConfig};

/// Version string written into run manifests and checkpoints.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
