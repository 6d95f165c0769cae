//! Gated recurrent cell with input, forget and output gates and a tanh
//! candidate:
//!
//! ```text
//! z = W x + U h + b          (gate blocks i, f, o, g)
//! c' = σ(f) ⊙ c + σ(i) ⊙ tanh(g)
//! h' = σ(o) ⊙ tanh(c')
//! ```

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::params::{glorot_with_fans, slice, slice_mut, ParamSet};

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentCellParams {
    /// `4q x p`, gate blocks stacked as input, forget, output, candidate.
    pub w_input: Array2<f64>,
    /// `4q x q`.
    pub w_hidden: Array2<f64>,
    /// `4q`.
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Array1<f64>,
    pub c: Array1<f64>,
}

impl CellState {
    pub fn zeros(q: usize) -> Self {
        Self { h: Array1::zeros(q), c: Array1::zeros(q) }
    }
}

/// Values saved by a forward step for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    x: Array1<f64>,
    h_prev: Array1<f64>,
    c_prev: Array1<f64>,
    /// Activated gates: σ(i), σ(f), σ(o), tanh(g).
    gates: Array1<f64>,
    tanh_c: Array1<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `m += a bᵀ`.
pub(crate) fn add_outer(m: &mut Array2<f64>, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) {
    let a = a.insert_axis(Axis(1));
    let b = b.insert_axis(Axis(0));
    ndarray::linalg::general_mat_mul(1.0, &a, &b, 1.0, m);
}

impl RecurrentCellParams {
    pub fn zeros(input: usize, state: usize) -> Self {
        Self {
            w_input: Array2::zeros((4 * state, input)),
            w_hidden: Array2::zeros((4 * state, state)),
            bias: Array1::zeros(4 * state),
        }
    }

    /// Glorot-uniform weights per gate block, zero bias except a forget-gate
    /// bias of one.
    pub fn init<R: Rng + ?Sized>(input: usize, state: usize, rng: &mut R) -> Self {
        let mut bias = Array1::zeros(4 * state);
        bias.slice_mut(s![state..2 * state]).fill(1.0);
        Self {
            w_input: glorot_with_fans(4 * state, input, input, state, rng),
            w_hidden: glorot_with_fans(4 * state, state, state, state, rng),
            bias,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.state_dim())
    }

    pub fn input_dim(&self) -> usize {
        self.w_input.ncols()
    }

    pub fn state_dim(&self) -> usize {
        self.w_hidden.ncols()
    }

    /// One recurrent step with shape checks.
    pub fn step(&self, x: ArrayView1<'_, f64>, state: &CellState) -> Result<CellState> {
        let q = self.state_dim();
        if x.len() != self.input_dim() || state.h.len() != q || state.c.len() != q {
            return Err(Error::Shape(format!(
                "cell expects input {} and state {q}, got {} and {}/{}",
                self.input_dim(),
                x.len(),
                state.h.len(),
                state.c.len()
            )));
        }
        Ok(self.forward(x, state).0)
    }

    pub(crate) fn forward(
        &self,
        x: ArrayView1<'_, f64>,
        state: &CellState,
    ) -> (CellState, StepCache) {
        let q = self.state_dim();
        let mut z = self.w_input.dot(&x) + self.w_hidden.dot(&state.h) + &self.bias;
        z.slice_mut(s![..3 * q]).mapv_inplace(sigmoid);
        z.slice_mut(s![3 * q..]).mapv_inplace(f64::tanh);
        let (i, f, o, g) = gate_views(&z, q);
        let c = &f * &state.c + &i * &g;
        let tanh_c = c.mapv(f64::tanh);
        let h = &o * &tanh_c;
        let cache = StepCache {
            x: x.to_owned(),
            h_prev: state.h.clone(),
            c_prev: state.c.clone(),
            gates: z,
            tanh_c,
        };
        (CellState { h, c }, cache)
    }

    /// Back-propagates `dh`, `dc` (gradients w.r.t. the step's outputs)
    /// through one step. Accumulates parameter gradients into `grad` and
    /// returns `(dx, dh_prev, dc_prev)`.
    pub(crate) fn backward(
        &self,
        cache: &StepCache,
        dh: ArrayView1<'_, f64>,
        dc: ArrayView1<'_, f64>,
        grad: &mut Self,
    ) -> (Array1<f64>, Array1<f64>, Array1<f64>) {
        let q = self.state_dim();
        let (i, f, o, g) = gate_views(&cache.gates, q);
        let dc_total = &dc + &(&dh * &o * &cache.tanh_c.mapv(|t| 1.0 - t * t));
        let mut dz = Array1::zeros(4 * q);
        {
            let (mut di, rest) = dz.view_mut().split_at(Axis(0), q);
            let (mut df, rest) = rest.split_at(Axis(0), q);
            let (mut dout, mut dg) = rest.split_at(Axis(0), q);
            di.assign(&(&dc_total * &g * &i.mapv(|a| a * (1.0 - a))));
            df.assign(&(&dc_total * &cache.c_prev * &f.mapv(|a| a * (1.0 - a))));
            dout.assign(&(&dh * &cache.tanh_c * &o.mapv(|a| a * (1.0 - a))));
            dg.assign(&(&dc_total * &i * &g.mapv(|a| 1.0 - a * a)));
        }
        add_outer(&mut grad.w_input, dz.view(), cache.x.view());
        add_outer(&mut grad.w_hidden, dz.view(), cache.h_prev.view());
        grad.bias += &dz;
        let dx = self.w_input.t().dot(&dz);
        let dh_prev = self.w_hidden.t().dot(&dz);
        let dc_prev = &dc_total * &f;
        (dx, dh_prev, dc_prev)
    }

    /// Runs the cell over the rows of `inputs` from a zero state, returning
    /// the hidden state after each row.
    pub(crate) fn run(&self, inputs: ArrayView2<'_, f64>) -> (Array2<f64>, Vec<StepCache>) {
        let q = self.state_dim();
        let mut state = CellState::zeros(q);
        let mut hidden = Array2::zeros((inputs.nrows(), q));
        let mut caches = Vec::with_capacity(inputs.nrows());
        for (t, x) in inputs.rows().into_iter().enumerate() {
            let (next, cache) = self.forward(x, &state);
            hidden.row_mut(t).assign(&next.h);
            caches.push(cache);
            state = next;
        }
        (hidden, caches)
    }

    /// Backward pass of [`run`](Self::run) given the gradient w.r.t. every
    /// hidden output. Returns the gradient w.r.t. the inputs.
    pub(crate) fn run_backward(
        &self,
        caches: &[StepCache],
        d_hidden: ArrayView2<'_, f64>,
        grad: &mut Self,
    ) -> Array2<f64> {
        let q = self.state_dim();
        let mut dx = Array2::zeros((caches.len(), self.input_dim()));
        let mut dh_next = Array1::zeros(q);
        let mut dc_next = Array1::zeros(q);
        for t in (0..caches.len()).rev() {
            let dh = &d_hidden.row(t) + &dh_next;
            let (dxt, dh_prev, dc_prev) = self.backward(&caches[t], dh.view(), dc_next.view(), grad);
            dx.row_mut(t).assign(&dxt);
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
        dx
    }
}

fn gate_views(
    z: &Array1<f64>,
    q: usize,
) -> (ArrayView1<'_, f64>, ArrayView1<'_, f64>, ArrayView1<'_, f64>, ArrayView1<'_, f64>) {
    (
        z.slice(s![..q]),
        z.slice(s![q..2 * q]),
        z.slice(s![2 * q..3 * q]),
        z.slice(s![3 * q..]),
    )
}

impl ParamSet for RecurrentCellParams {
    fn tensors(&self) -> Vec<(String, &[f64])> {
        vec![
            ("w_input".into(), slice(&self.w_input)),
            ("w_hidden".into(), slice(&self.w_hidden)),
            ("bias".into(), slice(&self.bias)),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        vec![
            ("w_input".into(), slice_mut(&mut self.w_input)),
            ("w_hidden".into(), slice_mut(&mut self.w_hidden)),
            ("bias".into(), slice_mut(&mut self.bias)),
        ]
    }
}
