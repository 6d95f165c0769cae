//! Hierarchical video encoder: a bidirectional clip encoder with attention
//! pooling per segment, then a bidirectional segment encoder with attention
//! pooling over the segment vectors.

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};

use super::attention::{AttentionCache, AttentionParams};
use super::cell::{RecurrentCellParams, StepCache};
use super::params::HanParams;
use super::segment::Segmentation;

/// Forward and backward states concatenated per position (`len x 2q`).
pub fn bidirectional_encode(
    fwd: &RecurrentCellParams,
    bwd: &RecurrentCellParams,
    seq: ArrayView2<'_, f64>,
) -> Array2<f64> {
    BiCache::forward(fwd, bwd, seq).hidden
}

#[derive(Debug, Clone)]
pub(crate) struct BiCache {
    fwd: Vec<StepCache>,
    bwd: Vec<StepCache>,
    pub(crate) hidden: Array2<f64>,
}

impl BiCache {
    pub(crate) fn forward(
        fwd: &RecurrentCellParams,
        bwd: &RecurrentCellParams,
        seq: ArrayView2<'_, f64>,
    ) -> Self {
        assert!(seq.nrows() > 0, "bidirectional encoder over an empty sequence");
        let (hf, cf) = fwd.run(seq);
        let (hb, cb) = bwd.run(seq.slice(s![..;-1, ..]));
        let hidden = concatenate![Axis(1), hf, hb.slice(s![..;-1, ..])];
        Self { fwd: cf, bwd: cb, hidden }
    }

    pub(crate) fn backward(
        &self,
        fwd: &RecurrentCellParams,
        bwd: &RecurrentCellParams,
        d_hidden: ArrayView2<'_, f64>,
        grad_fwd: &mut RecurrentCellParams,
        grad_bwd: &mut RecurrentCellParams,
    ) -> Array2<f64> {
        let q = fwd.state_dim();
        let mut dx = fwd.run_backward(&self.fwd, d_hidden.slice(s![.., ..q]), grad_fwd);
        let dx_rev = bwd.run_backward(&self.bwd, d_hidden.slice(s![..;-1, q..]), grad_bwd);
        dx += &dx_rev.slice(s![..;-1, ..]);
        dx
    }
}

/// Encoder output: the pooled video representation and the decoder's
/// initial hidden state derived from it.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub segments: Array2<f64>,
    pub representation: Array1<f64>,
    pub initial_hidden: Array1<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct EncoderCache {
    segmentation: Segmentation,
    clip_levels: Vec<(BiCache, AttentionCache)>,
    segment_level: BiCache,
    segment_attention: AttentionCache,
    pub(crate) encoding: Encoding,
}

pub fn encode_video(
    han: &HanParams,
    latent_clips: ArrayView2<'_, f64>,
    segmentation: &Segmentation,
) -> Encoding {
    EncoderCache::forward(han, latent_clips, segmentation).encoding
}

fn pool(att: &AttentionParams, bi: &BiCache) -> (Array1<f64>, AttentionCache) {
    att.forward(bi.hidden.view())
}

impl EncoderCache {
    pub(crate) fn forward(
        han: &HanParams,
        latent_clips: ArrayView2<'_, f64>,
        segmentation: &Segmentation,
    ) -> Self {
        assert!(
            segmentation.covers(latent_clips.nrows()),
            "segmentation does not cover the clip sequence"
        );
        let width = 2 * han.clip_fwd.state_dim();
        let mut segments = Array2::zeros((segmentation.len(), width));
        let mut clip_levels = Vec::with_capacity(segmentation.len());
        for (k, range) in segmentation.ranges().iter().enumerate() {
            let bi = BiCache::forward(
                &han.clip_fwd,
                &han.clip_bwd,
                latent_clips.slice(s![range.clone(), ..]),
            );
            let (v, att) = pool(&han.clip_attention, &bi);
            segments.row_mut(k).assign(&v);
            clip_levels.push((bi, att));
        }
        let segment_level = BiCache::forward(&han.segment_fwd, &han.segment_bwd, segments.view());
        let (representation, segment_attention) = pool(&han.segment_attention, &segment_level);
        let initial_hidden = han.bridge_w.dot(&representation) + &han.bridge_b;
        Self {
            segmentation: segmentation.clone(),
            clip_levels,
            segment_level,
            segment_attention,
            encoding: Encoding { segments, representation, initial_hidden },
        }
    }

    /// Back-propagates the gradient of the decoder's initial hidden state to
    /// the latent clips.
    pub(crate) fn backward(
        &self,
        han: &HanParams,
        d_initial_hidden: &Array1<f64>,
        grad: &mut HanParams,
        n_clips: usize,
    ) -> Array2<f64> {
        let enc = &self.encoding;
        grad.bridge_b += d_initial_hidden;
        super::cell::add_outer(&mut grad.bridge_w, d_initial_hidden.view(), enc.representation.view());
        let d_rep = han.bridge_w.t().dot(d_initial_hidden);

        let d_seg_hidden = han.segment_attention.backward(
            &self.segment_attention,
            self.segment_level.hidden.view(),
            &d_rep,
            &mut grad.segment_attention,
        );
        let d_segments = self.segment_level.backward(
            &han.segment_fwd,
            &han.segment_bwd,
            d_seg_hidden.view(),
            &mut grad.segment_fwd,
            &mut grad.segment_bwd,
        );

        let mut d_clips = Array2::zeros((n_clips, han.clip_fwd.input_dim()));
        for (k, range) in self.segmentation.ranges().iter().enumerate() {
            let (bi, att) = &self.clip_levels[k];
            let d_hidden = han.clip_attention.backward(
                att,
                bi.hidden.view(),
                &d_segments.row(k).to_owned(),
                &mut grad.clip_attention,
            );
            let dx = bi.backward(
                &han.clip_fwd,
                &han.clip_bwd,
                d_hidden.view(),
                &mut grad.clip_fwd,
                &mut grad.clip_bwd,
            );
            d_clips.slice_mut(s![range.clone(), ..]).assign(&dx);
        }
        d_clips
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::han::params::HanDims;
    use crate::han::segment::{segment_clips, Strategy};
    use crate::han::CellState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_seq(len: usize, dim: usize, r: &mut ChaCha8Rng) -> Array2<f64> {
        crate::params::glorot_with_fans(len, dim, 1, 1, r)
    }

    fn unidirectional(cell: &RecurrentCellParams, rows: &[Array1<f64>]) -> Vec<Array1<f64>> {
        let mut state = CellState::zeros(cell.state_dim());
        rows.iter()
            .map(|x| {
                state = cell.step(x.view(), &state).unwrap();
                state.h.clone()
            })
            .collect()
    }

    #[test]
    fn length_one_sees_same_input_both_ways() {
        let mut r = rng(5);
        let cell = RecurrentCellParams::init(3, 4, &mut r);
        let seq = random_seq(1, 3, &mut r);
        let h = bidirectional_encode(&cell, &cell, seq.view());
        assert_eq!(h.slice(s![0, ..4]), h.slice(s![0, 4..]));
    }

    #[test]
    fn palindrome_is_mirror_symmetric() {
        let mut r = rng(6);
        let cell = RecurrentCellParams::init(2, 3, &mut r);
        let half = random_seq(3, 2, &mut r);
        let seq = concatenate![Axis(0), half, half.slice(s![..;-1, ..])];
        let h = bidirectional_encode(&cell, &cell, seq.view());
        let len = seq.nrows();
        for t in 0..len {
            for k in 0..3 {
                assert!((h[[t, k]] - h[[len - 1 - t, 3 + k]]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn equals_two_unidirectional_runs() {
        let mut r = rng(7);
        let fwd = RecurrentCellParams::init(3, 2, &mut r);
        let bwd = RecurrentCellParams::init(3, 2, &mut r);
        let seq = random_seq(5, 3, &mut r);
        let rows: Vec<Array1<f64>> = seq.rows().into_iter().map(|x| x.to_owned()).collect();
        let hf = unidirectional(&fwd, &rows);
        let rev: Vec<_> = rows.iter().rev().cloned().collect();
        let mut hb = unidirectional(&bwd, &rev);
        hb.reverse();
        let h = bidirectional_encode(&fwd, &bwd, seq.view());
        for t in 0..5 {
            let expect = concatenate![Axis(0), hf[t], hb[t]];
            assert_eq!(h.row(t), expect);
        }
    }

    fn dims() -> HanDims {
        HanDims { latent: 3, hidden: 4, attention: 5, vocab: 6 }
    }

    #[test]
    fn encoder_composes_the_building_blocks() {
        let mut r = rng(8);
        let han = HanParams::init(dims(), &mut r);
        let clips = random_seq(14, 3, &mut r);
        let seg = segment_clips(14, Strategy::EvenK(7));
        let enc = encode_video(&han, clips.view(), &seg);
        assert_eq!(enc.segments.nrows(), 7);
        for (k, range) in seg.ranges().iter().enumerate() {
            let h = bidirectional_encode(&han.clip_fwd, &han.clip_bwd, clips.slice(s![range.clone(), ..]));
            assert_eq!(enc.segments.row(k), han.clip_attention.pool(h.view()));
        }
        let h = bidirectional_encode(&han.segment_fwd, &han.segment_bwd, enc.segments.view());
        assert_eq!(enc.representation, han.segment_attention.pool(h.view()));
        assert_eq!(enc.initial_hidden, han.bridge_w.dot(&enc.representation) + &han.bridge_b);
    }

    #[test]
    fn single_segment_reduces_to_length_one_word_encoder() {
        let mut r = rng(9);
        let han = HanParams::init(dims(), &mut r);
        let clips = random_seq(1, 3, &mut r);
        let seg = segment_clips(1, Strategy::TwoSplit);
        let enc = encode_video(&han, clips.view(), &seg);
        assert_eq!(enc.segments.nrows(), 1);
        let h = bidirectional_encode(&han.segment_fwd, &han.segment_bwd, enc.segments.view());
        assert_eq!(enc.representation, h.row(0));
    }
}
