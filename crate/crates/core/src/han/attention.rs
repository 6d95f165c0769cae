//! Additive attention pooling against a learned query:
//! `u_t = tanh(P h_t + b)`, `α = softmax(qᵀ u_t)`, output `Σ α_t h_t`.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::params::{glorot, glorot_vector, slice, slice_mut, ParamSet};

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    /// `q_att x 2q`.
    pub proj: Array2<f64>,
    pub bias: Array1<f64>,
    pub query: Array1<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct AttentionCache {
    pub(crate) u: Array2<f64>,
    pub(crate) weights: Array1<f64>,
}

pub(crate) fn softmax_in_place(x: &mut Array1<f64>) {
    let max = x.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    x.mapv_inplace(|v| (v - max).exp());
    let sum = x.sum();
    *x /= sum;
}

impl AttentionParams {
    pub fn zeros(input: usize, attention: usize) -> Self {
        Self {
            proj: Array2::zeros((attention, input)),
            bias: Array1::zeros(attention),
            query: Array1::zeros(attention),
        }
    }

    pub fn init<R: Rng + ?Sized>(input: usize, attention: usize, rng: &mut R) -> Self {
        Self {
            proj: glorot(attention, input, rng),
            bias: Array1::zeros(attention),
            query: glorot_vector(attention, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.proj.ncols(), self.proj.nrows())
    }

    /// Attention-weighted sum of the rows of `hidden`.
    pub fn pool(&self, hidden: ArrayView2<'_, f64>) -> Array1<f64> {
        self.forward(hidden).0
    }

    /// Softmax attention weights over the rows of `hidden`.
    pub fn weights(&self, hidden: ArrayView2<'_, f64>) -> Array1<f64> {
        self.forward(hidden).1.weights
    }

    pub(crate) fn forward(&self, hidden: ArrayView2<'_, f64>) -> (Array1<f64>, AttentionCache) {
        assert!(hidden.nrows() > 0, "attention over an empty sequence");
        let mut u = hidden.dot(&self.proj.t());
        u += &self.bias;
        u.mapv_inplace(f64::tanh);
        let mut weights = u.dot(&self.query);
        softmax_in_place(&mut weights);
        let out = weights.dot(&hidden);
        (out, AttentionCache { u, weights })
    }

    /// Returns the gradient w.r.t. `hidden`; accumulates into `grad`.
    pub(crate) fn backward(
        &self,
        cache: &AttentionCache,
        hidden: ArrayView2<'_, f64>,
        d_out: &Array1<f64>,
        grad: &mut Self,
    ) -> Array2<f64> {
        let a = &cache.weights;
        // direct path through the weighted sum
        let mut d_hidden = a.view().insert_axis(Axis(1)).dot(&d_out.view().insert_axis(Axis(0)));
        let d_weights = hidden.dot(d_out);
        let mean = a.dot(&d_weights);
        let d_scores = a * &(d_weights - mean);
        grad.query += &cache.u.t().dot(&d_scores);
        // d_pre[t] = d_scores[t] * query ⊙ (1 - u_t²)
        let mut d_pre = cache.u.mapv(|v| 1.0 - v * v);
        for (mut row, &ds) in d_pre.rows_mut().into_iter().zip(d_scores.iter()) {
            row *= ds;
            row *= &self.query;
        }
        ndarray::linalg::general_mat_mul(1.0, &d_pre.t(), &hidden, 1.0, &mut grad.proj);
        grad.bias += &d_pre.sum_axis(Axis(0));
        d_hidden += &d_pre.dot(&self.proj);
        d_hidden
    }
}

impl ParamSet for AttentionParams {
    fn tensors(&self) -> Vec<(String, &[f64])> {
        vec![
            ("proj".into(), slice(&self.proj)),
            ("bias".into(), slice(&self.bias)),
            ("query".into(), slice(&self.query)),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        vec![
            ("proj".into(), slice_mut(&mut self.proj)),
            ("bias".into(), slice_mut(&mut self.bias)),
            ("query".into(), slice_mut(&mut self.query)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_row_passes_through() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let att = AttentionParams::init(4, 3, &mut rng);
        let h = array![[0.5, -1.0, 2.0, 0.0]];
        assert_eq!(att.pool(h.view()), h.row(0));
    }

    #[test]
    fn identical_rows_are_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let att = AttentionParams::init(3, 5, &mut rng);
        let h = array![[0.25, -1.5, 3.0], [0.25, -1.5, 3.0], [0.25, -1.5, 3.0]];
        let out = att.pool(h.view());
        for k in 0..3 {
            assert!((out[k] - h[[0, k]]).abs() < 1e-15);
        }
    }

    #[test]
    fn explicit_weighted_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let att = AttentionParams::init(2, 3, &mut rng);
        let h = array![[1.0, -0.5], [0.2, 0.9], [-1.3, 0.4], [0.0, 2.0]];
        let scores: Vec<f64> = h
            .rows()
            .into_iter()
            .map(|row| {
                (0..3)
                    .map(|a| {
                        let pre = att.bias[a] + att.proj[[a, 0]] * row[0] + att.proj[[a, 1]] * row[1];
                        att.query[a] * pre.tanh()
                    })
                    .sum()
            })
            .collect();
        let z: f64 = scores.iter().map(|s| s.exp()).sum();
        let w: Vec<f64> = scores.iter().map(|s| s.exp() / z).collect();
        let weights = att.weights(h.view());
        assert!((weights.sum() - 1.0).abs() < 1e-15);
        let out = att.pool(h.view());
        for k in 0..2 {
            let expect: f64 = (0..4).map(|t| w[t] * h[[t, k]]).sum();
            assert!((out[k] - expect).abs() < 1e-14);
            let col = h.column(k);
            let (lo, hi) = col.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            assert!(out[k] >= lo && out[k] <= hi);
        }
    }
}
