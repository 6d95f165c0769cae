use ndarray::{Array1, Array2};
use rand::Rng;

use super::attention::AttentionParams;
use super::cell::RecurrentCellParams;
use crate::params::{glorot, prefixed, prefixed_mut, slice, slice_mut, ParamSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HanDims {
    /// Latent dimension `D_s`; the clip encoder and the decoder read latent vectors.
    pub latent: usize,
    /// State size `q` of every recurrent cell.
    pub hidden: usize,
    /// Width of the attention scoring layer.
    pub attention: usize,
    /// Vocabulary size `D_w`, including the reserved symbols.
    pub vocab: usize,
}

/// All encoder, attention and decoder parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HanParams {
    pub clip_fwd: RecurrentCellParams,
    pub clip_bwd: RecurrentCellParams,
    pub clip_attention: AttentionParams,
    pub segment_fwd: RecurrentCellParams,
    pub segment_bwd: RecurrentCellParams,
    pub segment_attention: AttentionParams,
    /// Affine map from the video representation to the decoder's first
    /// hidden state: `q x 2q`.
    pub bridge_w: Array2<f64>,
    pub bridge_b: Array1<f64>,
    pub decoder: RecurrentCellParams,
    /// `D_w x q`.
    pub emission_w: Array2<f64>,
    pub emission_b: Array1<f64>,
}

impl HanParams {
    pub fn zeros(d: HanDims) -> Self {
        let q2 = 2 * d.hidden;
        Self {
            clip_fwd: RecurrentCellParams::zeros(d.latent, d.hidden),
            clip_bwd: RecurrentCellParams::zeros(d.latent, d.hidden),
            clip_attention: AttentionParams::zeros(q2, d.attention),
            segment_fwd: RecurrentCellParams::zeros(q2, d.hidden),
            segment_bwd: RecurrentCellParams::zeros(q2, d.hidden),
            segment_attention: AttentionParams::zeros(q2, d.attention),
            bridge_w: Array2::zeros((d.hidden, q2)),
            bridge_b: Array1::zeros(d.hidden),
            decoder: RecurrentCellParams::zeros(d.latent, d.hidden),
            emission_w: Array2::zeros((d.vocab, d.hidden)),
            emission_b: Array1::zeros(d.vocab),
        }
    }

    pub fn init<R: Rng + ?Sized>(d: HanDims, rng: &mut R) -> Self {
        let q2 = 2 * d.hidden;
        Self {
            clip_fwd: RecurrentCellParams::init(d.latent, d.hidden, rng),
            clip_bwd: RecurrentCellParams::init(d.latent, d.hidden, rng),
            clip_attention: AttentionParams::init(q2, d.attention, rng),
            segment_fwd: RecurrentCellParams::init(q2, d.hidden, rng),
            segment_bwd: RecurrentCellParams::init(q2, d.hidden, rng),
            segment_attention: AttentionParams::init(q2, d.attention, rng),
            bridge_w: glorot(d.hidden, q2, rng),
            bridge_b: Array1::zeros(d.hidden),
            decoder: RecurrentCellParams::init(d.latent, d.hidden, rng),
            emission_w: glorot(d.vocab, d.hidden, rng),
            emission_b: Array1::zeros(d.vocab),
        }
    }

    pub fn dims(&self) -> HanDims {
        HanDims {
            latent: self.decoder.input_dim(),
            hidden: self.decoder.state_dim(),
            attention: self.clip_attention.proj.nrows(),
            vocab: self.emission_w.nrows(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.dims())
    }
}

impl ParamSet for HanParams {
    fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        out.extend(prefixed("clip_encoder.fwd", self.clip_fwd.tensors()));
        out.extend(prefixed("clip_encoder.bwd", self.clip_bwd.tensors()));
        out.extend(prefixed("clip_encoder.attention", self.clip_attention.tensors()));
        out.extend(prefixed("segment_encoder.fwd", self.segment_fwd.tensors()));
        out.extend(prefixed("segment_encoder.bwd", self.segment_bwd.tensors()));
        out.extend(prefixed("segment_encoder.attention", self.segment_attention.tensors()));
        out.push(("bridge.w".into(), slice(&self.bridge_w)));
        out.push(("bridge.b".into(), slice(&self.bridge_b)));
        out.extend(prefixed("decoder", self.decoder.tensors()));
        out.push(("emission.w".into(), slice(&self.emission_w)));
        out.push(("emission.b".into(), slice(&self.emission_b)));
        out
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = Vec::new();
        out.extend(prefixed_mut("clip_encoder.fwd", self.clip_fwd.tensors_mut()));
        out.extend(prefixed_mut("clip_encoder.bwd", self.clip_bwd.tensors_mut()));
        out.extend(prefixed_mut("clip_encoder.attention", self.clip_attention.tensors_mut()));
        out.extend(prefixed_mut("segment_encoder.fwd", self.segment_fwd.tensors_mut()));
        out.extend(prefixed_mut("segment_encoder.bwd", self.segment_bwd.tensors_mut()));
        out.extend(prefixed_mut("segment_encoder.attention", self.segment_attention.tensors_mut()));
        out.push(("bridge.w".into(), slice_mut(&mut self.bridge_w)));
        out.push(("bridge.b".into(), slice_mut(&mut self.bridge_b)));
        out.extend(prefixed_mut("decoder", self.decoder.tensors_mut()));
        out.push(("emission.w".into(), slice_mut(&mut self.emission_w)));
        out.push(("emission.b".into(), slice_mut(&mut self.emission_b)));
        out
    }
}
