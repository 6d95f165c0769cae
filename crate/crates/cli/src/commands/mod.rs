pub mod align;
pub mod eval;
pub mod gradcheck;
pub mod probe;
pub mod sweep;
pub mod synth;
pub mod train;
