//! The shared video-sentence latent space and its DTW relevance loss.

mod dtw;
mod params;
mod relevance;
mod window;

pub use dtw::{dtw, AlignmentPath, DtwTable};
pub use params::{pair_distance, project_sentence, project_video, LatentSpaceParams};
pub use relevance::{relevance_grad, relevance_loss, Relevance};
pub use window::WindowPolicy;
