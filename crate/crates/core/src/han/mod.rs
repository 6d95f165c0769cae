//! Hierarchical attention encoder-decoder over latent clip sequences.

mod attention;
mod cell;
mod decoder;
mod encoder;
mod params;
mod segment;

pub use attention::AttentionParams;
pub use cell::{CellState, RecurrentCellParams};
pub use decoder::{
    coherence_grad, coherence_loss, emission_log_probs, emission_probs, greedy_decode,
    kbest_decode, Coherence, Decoder, DecoderState, Hypothesis,
};
pub use encoder::{bidirectional_encode, encode_video, Encoding};
pub use params::{HanDims, HanParams};
pub use segment::{segment_clips, Segmentation, Strategy};
