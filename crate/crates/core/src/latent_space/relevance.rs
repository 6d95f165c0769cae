use ndarray::{Array2, Axis};

use super::dtw::{dtw, AlignmentPath, DtwTable};
use super::params::{project_sentence, project_video, LatentSpaceParams};
use super::window::WindowPolicy;
use crate::corpus::{ClipFeatureSequence, Sentence};
use crate::error::Result;

/// Forward pass of the relevance loss with everything needed to
/// differentiate it.
#[derive(Debug, Clone)]
pub struct Relevance {
    pub clips: Array2<f64>,
    pub words: Array2<f64>,
    pub table: DtwTable,
    pub path: AlignmentPath,
}

impl Relevance {
    pub fn compute(
        video: &ClipFeatureSequence,
        sentence: &Sentence,
        params: &LatentSpaceParams,
        windowed: bool,
    ) -> Result<Self> {
        let clips = project_video(&params.t_v, video)?;
        let words = project_sentence(&params.t_s, sentence)?;
        let policy = if windowed {
            Some(WindowPolicy::default_for(clips.nrows(), words.nrows())?)
        } else {
            None
        };
        let table = dtw(clips.view(), words.view(), policy.as_ref())?;
        let path = table.backtrack()?;
        Ok(Self { clips, words, table, path })
    }

    pub fn loss(&self) -> f64 {
        self.table.distance()
    }

    /// Subgradient of `D[n,m]` along the backtracked path. Cells at zero
    /// distance contribute nothing.
    pub fn grad(
        &self,
        video: &ClipFeatureSequence,
        sentence: &Sentence,
        params: &LatentSpaceParams,
    ) -> LatentSpaceParams {
        let mut grad = params.zeros_like();
        for &(i, j) in self.path.cells() {
            let d = self.table.local[[i, j]];
            if d == 0.0 {
                continue;
            }
            let unit = (&self.clips.row(i) - &self.words.row(j)) / d;
            let unit_col = unit.view().insert_axis(Axis(1));
            let clip_row = video.clip(i).insert_axis(Axis(0));
            ndarray::linalg::general_mat_mul(1.0, &unit_col, &clip_row, 1.0, &mut grad.t_v);
            let mut col = grad.t_s.column_mut(sentence.tokens()[j]);
            col -= &unit;
        }
        grad
    }
}

/// `E_r`: the DTW distance between the projected clip and word sequences.
pub fn relevance_loss(
    video: &ClipFeatureSequence,
    sentence: &Sentence,
    params: &LatentSpaceParams,
    windowed: bool,
) -> Result<f64> {
    Ok(Relevance::compute(video, sentence, params, windowed)?.loss())
}

/// `E_r` and its gradients with respect to `T_v` and `T_s`.
pub fn relevance_grad(
    video: &ClipFeatureSequence,
    sentence: &Sentence,
    params: &LatentSpaceParams,
    windowed: bool,
) -> Result<(f64, LatentSpaceParams)> {
    let r = Relevance::compute(video, sentence, params, windowed)?;
    Ok((r.loss(), r.grad(video, sentence, params)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_when_latents_coincide() {
        // two clips per word, T_v identity, T_s columns equal to the clips
        let video =
            ClipFeatureSequence::new(array![[1.0, 0.0], [1.0, 0.0], [0.0, 2.0], [0.0, 2.0]])
                .unwrap();
        let sentence = Sentence::new(vec![2, 3]).unwrap();
        let params = LatentSpaceParams {
            t_v: Array2::eye(2),
            t_s: array![[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 2.0]],
        };
        for windowed in [false, true] {
            let (loss, grad) = relevance_grad(&video, &sentence, &params, windowed).unwrap();
            assert_eq!(loss, 0.0);
            assert!(grad.t_v.iter().chain(grad.t_s.iter()).all(|&g| g == 0.0));
        }
    }

    #[test]
    fn single_clip_single_word_closed_form() {
        let video = ClipFeatureSequence::new(array![[0.5, -1.0, 2.0]]).unwrap();
        let sentence = Sentence::new(vec![2]).unwrap();
        let params = LatentSpaceParams {
            t_v: array![[1.0, 0.5, -0.25], [0.0, 2.0, 1.0]],
            t_s: array![[9.0, 9.0, 0.3], [9.0, 9.0, -0.7]],
        };
        let (loss, grad) = relevance_grad(&video, &sentence, &params, false).unwrap();
        let x = params.t_v.dot(&video.clip(0));
        let diff = &x - &params.t_s.column(2);
        let norm = diff.dot(&diff).sqrt();
        assert!((loss - norm).abs() < 1e-15);
        for r in 0..2 {
            for c in 0..3 {
                assert!((grad.t_v[[r, c]] - diff[r] / norm * video.clip(0)[c]).abs() < 1e-15);
            }
            assert!((grad.t_s[[r, 2]] + diff[r] / norm).abs() < 1e-15);
            assert_eq!(grad.t_s[[r, 0]], 0.0);
        }
    }
}
