use ndarray::{Array2, ArrayView1};
use rand::Rng;

use crate::corpus::{ClipFeatureSequence, Sentence};
use crate::error::{Error, Result};
use crate::params::{glorot_with_fans, slice, slice_mut, ParamSet};

/// The two linear maps into the shared latent space.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSpaceParams {
    /// `D_s x D_c`, applied to clip features.
    pub t_v: Array2<f64>,
    /// `D_s x D_w`, applied to one-hot words; column `k` is word `k`'s latent.
    pub t_s: Array2<f64>,
}

impl LatentSpaceParams {
    pub fn zeros(latent_dim: usize, feature_dim: usize, vocab_size: usize) -> Self {
        Self {
            t_v: Array2::zeros((latent_dim, feature_dim)),
            t_s: Array2::zeros((latent_dim, vocab_size)),
        }
    }

    pub fn init<R: Rng + ?Sized>(
        latent_dim: usize,
        feature_dim: usize,
        vocab_size: usize,
        rng: &mut R,
    ) -> Self {
        Self {
            t_v: glorot_with_fans(latent_dim, feature_dim, feature_dim, latent_dim, rng),
            // one-hot inputs have fan-in 1
            t_s: glorot_with_fans(latent_dim, vocab_size, 1, latent_dim, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self { t_v: Array2::zeros(self.t_v.dim()), t_s: Array2::zeros(self.t_s.dim()) }
    }

    pub fn latent_dim(&self) -> usize {
        self.t_v.nrows()
    }

    pub fn feature_dim(&self) -> usize {
        self.t_v.ncols()
    }

    pub fn vocab_size(&self) -> usize {
        self.t_s.ncols()
    }

    /// Latent vector of one vocabulary entry.
    pub fn word_latent(&self, word: usize) -> ArrayView1<'_, f64> {
        self.t_s.column(word)
    }
}

impl ParamSet for LatentSpaceParams {
    fn tensors(&self) -> Vec<(String, &[f64])> {
        vec![("t_v".into(), slice(&self.t_v)), ("t_s".into(), slice(&self.t_s))]
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        vec![("t_v".into(), slice_mut(&mut self.t_v)), ("t_s".into(), slice_mut(&mut self.t_s))]
    }
}

/// Row `i` of the result is `T_v v_i`.
pub fn project_video(t_v: &Array2<f64>, video: &ClipFeatureSequence) -> Result<Array2<f64>> {
    if t_v.ncols() != video.dim() {
        return Err(Error::Shape(format!(
            "T_v has {} columns, clips have dimension {}",
            t_v.ncols(),
            video.dim()
        )));
    }
    Ok(video.as_array().dot(&t_v.t()))
}

/// Row `j` of the result is `T_s s_j`, i.e. column `s_j` of `T_s`.
pub fn project_sentence(t_s: &Array2<f64>, sentence: &Sentence) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((sentence.len(), t_s.nrows()));
    for (mut row, &w) in out.rows_mut().into_iter().zip(sentence.tokens()) {
        if w >= t_s.ncols() {
            return Err(Error::IndexOutOfRange { index: w, size: t_s.ncols() });
        }
        row.assign(&t_s.column(w));
    }
    Ok(out)
}

/// Euclidean distance between two latent vectors.
pub fn pair_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("vector lengths {} and {}", a.len(), b.len())));
    }
    Ok(euclidean(a, b))
}

pub(crate) fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(rows: Array2<f64>) -> ClipFeatureSequence {
        ClipFeatureSequence::new(rows).unwrap()
    }

    #[test]
    fn identity_and_zero_projection() {
        let v = seq(array![[1.0, 2.0], [3.0, -4.0]]);
        assert_eq!(project_video(&Array2::eye(2), &v).unwrap(), v.as_array());
        assert_eq!(project_video(&Array2::zeros((3, 2)), &v).unwrap(), Array2::<f64>::zeros((2, 3)));
        assert!(project_video(&Array2::zeros((3, 5)), &v).is_err());
    }

    #[test]
    fn video_projection_matches_per_row_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t_v = glorot_with_fans(3, 2, 2, 3, &mut rng);
        let v = seq(glorot_with_fans(4, 2, 1, 1, &mut rng));
        let out = project_video(&t_v, &v).unwrap();
        for i in 0..4 {
            for r in 0..3 {
                let expect: f64 = (0..2).map(|c| t_v[[r, c]] * v.clip(i)[c]).sum();
                assert!((out[[i, r]] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sentence_projection_selects_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t_s = glorot_with_fans(3, 6, 1, 3, &mut rng);
        let s = Sentence::new(vec![4, 2, 4]).unwrap();
        let out = project_sentence(&t_s, &s).unwrap();
        for (j, &w) in s.tokens().iter().enumerate() {
            assert_eq!(out.row(j), t_s.column(w));
            let onehot = Array1::from_shape_fn(6, |k| if k == w { 1.0 } else { 0.0 });
            let dense = t_s.dot(&onehot);
            for r in 0..3 {
                assert!((out[[j, r]] - dense[r]).abs() < 1e-15);
            }
        }
        let zero = project_sentence(&Array2::zeros((3, 6)), &s).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
        assert!(project_sentence(&t_s, &Sentence::new(vec![6]).unwrap()).is_err());
    }

    #[test]
    fn distances() {
        let x = array![1.5, -2.0];
        assert_eq!(pair_distance(x.view(), x.view()).unwrap(), 0.0);
        assert_eq!(pair_distance(array![0.0, 0.0].view(), array![3.0, 4.0].view()).unwrap(), 5.0);
        assert!(pair_distance(array![0.0].view(), array![3.0, 4.0].view()).is_err());
        let a = array![0.3, -1.1, 2.5];
        let b = array![-0.7, 0.4, 1.0];
        let expect = (1.0f64 + 2.25 + 2.25).sqrt();
        assert!((pair_distance(a.view(), b.view()).unwrap() - expect).abs() < 1e-15);
    }
}
