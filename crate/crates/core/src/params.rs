//! Named parameter tensors, shared by the optimizer, the regularizer, the
//! checkpoint writer and the gradient checker.

use ndarray::{Array, Array1, Array2, Dimension};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

/// A fixed, ordered collection of named `f64` tensors. Gradients use the
/// same type as the parameters they belong to.
pub trait ParamSet {
    /// Tensors in a stable order. Names are dotted paths; the first segment
    /// is the parameter group.
    fn tensors(&self) -> Vec<(String, &[f64])>;

    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn squared_norm(&self) -> f64 {
        self.tensors().iter().flat_map(|(_, t)| t.iter()).map(|x| x * x).sum()
    }

    fn scale(&mut self, s: f64) {
        for (_, t) in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x *= s);
        }
    }

    /// `self += s * other`.
    fn add_scaled(&mut self, other: &Self, s: f64)
    where
        Self: Sized,
    {
        for ((_, dst), (_, src)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            dst.iter_mut().zip(src).for_each(|(d, x)| *d += s * x);
        }
    }

    fn first_non_finite(&self) -> Option<String> {
        self.tensors()
            .into_iter()
            .find(|(_, t)| t.iter().any(|x| !x.is_finite()))
            .map(|(name, _)| name)
    }

    fn flatten(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|(_, t)| t.iter().copied()).collect()
    }

    fn assign_flat(&mut self, values: &[f64]) {
        let mut at = 0;
        for (_, t) in self.tensors_mut() {
            t.copy_from_slice(&values[at..at + t.len()]);
            at += t.len();
        }
        assert_eq!(at, values.len(), "flat parameter length mismatch");
    }
}

pub(crate) fn slice<D: Dimension>(a: &Array<f64, D>) -> &[f64] {
    a.as_slice().expect("parameters are contiguous")
}

pub(crate) fn slice_mut<D: Dimension>(a: &mut Array<f64, D>) -> &mut [f64] {
    a.as_slice_mut().expect("parameters are contiguous")
}

pub(crate) fn prefixed<'a>(
    prefix: &str,
    items: Vec<(String, &'a [f64])>,
) -> impl Iterator<Item = (String, &'a [f64])> + use<'a> {
    let prefix = prefix.to_string();
    items.into_iter().map(move |(n, t)| (format!("{prefix}.{n}"), t))
}

pub(crate) fn prefixed_mut<'a>(
    prefix: &str,
    items: Vec<(String, &'a mut [f64])>,
) -> impl Iterator<Item = (String, &'a mut [f64])> + use<'a> {
    let prefix = prefix.to_string();
    items.into_iter().map(move |(n, t)| (format!("{prefix}.{n}"), t))
}

/// Uniform in `[-s, s]` with `s = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<f64> {
    glorot_with_fans(rows, cols, cols, rows, rng)
}

pub fn glorot_with_fans<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    fan_in: usize,
    fan_out: usize,
    rng: &mut R,
) -> Array2<f64> {
    let s = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let dist = Uniform::new_inclusive(-s, s).expect("finite bound");
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

pub fn glorot_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Array1<f64> {
    let s = (6.0 / (len + 1) as f64).sqrt();
    let dist = Uniform::new_inclusive(-s, s).expect("finite bound");
    Array1::from_shape_simple_fn(len, || dist.sample(rng))
}
