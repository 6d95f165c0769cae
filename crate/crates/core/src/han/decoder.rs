//! Word-emitting decoder: teacher-forced coherence loss with its full
//! backward pass, and greedy / beam decoding.

use std::cmp::Ordering;

use ndarray::{Array1, Array2, ArrayView1};

use super::attention::softmax_in_place;
use super::cell::{add_outer, CellState, StepCache};
use super::encoder::EncoderCache;
use super::params::HanParams;
use super::segment::{segment_clips, Strategy};
use crate::corpus::{ClipFeatureSequence, Sentence, END, START};
use crate::error::{Error, Result};
use crate::latent_space::{project_video, LatentSpaceParams};

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    pub cell: CellState,
    /// Number of words consumed so far, `#Start` included.
    pub t: usize,
}

/// Softmax over the vocabulary of `W h + b`.
pub fn emission_probs(han: &HanParams, h: ArrayView1<'_, f64>) -> Array1<f64> {
    let mut logits = han.emission_w.dot(&h) + &han.emission_b;
    softmax_in_place(&mut logits);
    logits
}

/// Log-softmax over the vocabulary of `W h + b`.
pub fn emission_log_probs(han: &HanParams, h: ArrayView1<'_, f64>) -> Array1<f64> {
    let logits = han.emission_w.dot(&h) + &han.emission_b;
    let max = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits - lse
}

fn check_shapes(han: &HanParams, ls: &LatentSpaceParams) -> Result<()> {
    let d = han.dims();
    if d.latent != ls.latent_dim() || d.vocab != ls.vocab_size() {
        return Err(Error::Shape(format!(
            "HAN expects latent {} / vocabulary {}, latent space has {} / {}",
            d.latent,
            d.vocab,
            ls.latent_dim(),
            ls.vocab_size()
        )));
    }
    Ok(())
}

/// Teacher-forced forward pass of the coherence loss
/// `-Σ log p(target_t | h_t)` over the targets `s_1..s_m, #End`.
#[derive(Debug, Clone)]
pub struct Coherence {
    latent_clips: Array2<f64>,
    encoder: EncoderCache,
    inputs: Vec<usize>,
    targets: Vec<usize>,
    steps: Vec<StepCache>,
    hidden: Vec<Array1<f64>>,
    probs: Vec<Array1<f64>>,
    loss: f64,
}

impl Coherence {
    pub fn compute(
        han: &HanParams,
        ls: &LatentSpaceParams,
        video: &ClipFeatureSequence,
        sentence: &Sentence,
        strategy: Strategy,
    ) -> Result<Self> {
        check_shapes(han, ls)?;
        let latent_clips = project_video(&ls.t_v, video)?;
        let seg = segment_clips(latent_clips.nrows(), strategy);
        let encoder = EncoderCache::forward(han, latent_clips.view(), &seg);

        let mut inputs = vec![START];
        inputs.extend_from_slice(sentence.tokens());
        let mut targets = sentence.tokens().to_vec();
        targets.push(END);
        if let Some(&bad) = targets.iter().find(|&&w| w >= ls.vocab_size()) {
            return Err(Error::IndexOutOfRange { index: bad, size: ls.vocab_size() });
        }

        let q = han.decoder.state_dim();
        let mut state =
            CellState { h: encoder.encoding.initial_hidden.clone(), c: Array1::zeros(q) };
        let mut steps = Vec::with_capacity(inputs.len());
        let mut hidden = Vec::with_capacity(inputs.len());
        let mut probs = Vec::with_capacity(inputs.len());
        let mut loss = 0.0;
        for (&input, &target) in inputs.iter().zip(&targets) {
            let (next, cache) = han.decoder.forward(ls.word_latent(input), &state);
            loss -= emission_log_probs(han, next.h.view())[target];
            probs.push(emission_probs(han, next.h.view()));
            hidden.push(next.h.clone());
            steps.push(cache);
            state = next;
        }
        Ok(Self { latent_clips, encoder, inputs, targets, steps, hidden, probs, loss })
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }

    /// Emission distribution at each decoder step.
    pub fn step_probs(&self) -> &[Array1<f64>] {
        &self.probs
    }

    /// Back-propagation through time over the decoder and both encoders,
    /// mapped onto `T_v` and `T_s` through the latent projections.
    pub fn grad(
        &self,
        han: &HanParams,
        ls: &LatentSpaceParams,
        video: &ClipFeatureSequence,
    ) -> (HanParams, LatentSpaceParams) {
        let mut g = han.zeros_like();
        let mut g_ls = ls.zeros_like();
        let q = han.decoder.state_dim();
        let mut dh_next = Array1::zeros(q);
        let mut dc_next = Array1::zeros(q);
        for t in (0..self.steps.len()).rev() {
            let mut d_logits = self.probs[t].clone();
            d_logits[self.targets[t]] -= 1.0;
            add_outer(&mut g.emission_w, d_logits.view(), self.hidden[t].view());
            g.emission_b += &d_logits;
            let dh = han.emission_w.t().dot(&d_logits) + &dh_next;
            let (dx, dh_prev, dc_prev) =
                han.decoder.backward(&self.steps[t], dh.view(), dc_next.view(), &mut g.decoder);
            let mut col = g_ls.t_s.column_mut(self.inputs[t]);
            col += &dx;
            dh_next = dh_prev;
            dc_next = dc_prev;
        }
        // the initial cell state is the constant zero; only h0 carries gradient
        let d_clips = self.encoder.backward(han, &dh_next, &mut g, self.latent_clips.nrows());
        ndarray::linalg::general_mat_mul(
            1.0,
            &d_clips.t(),
            video.as_array(),
            1.0,
            &mut g_ls.t_v,
        );
        (g, g_ls)
    }
}

pub fn coherence_loss(
    han: &HanParams,
    ls: &LatentSpaceParams,
    video: &ClipFeatureSequence,
    sentence: &Sentence,
    strategy: Strategy,
) -> Result<f64> {
    Ok(Coherence::compute(han, ls, video, sentence, strategy)?.loss())
}

/// Coherence loss with gradients for the HAN and latent-space parameters.
pub fn coherence_grad(
    han: &HanParams,
    ls: &LatentSpaceParams,
    video: &ClipFeatureSequence,
    sentence: &Sentence,
    strategy: Strategy,
) -> Result<(f64, HanParams, LatentSpaceParams)> {
    let c = Coherence::compute(han, ls, video, sentence, strategy)?;
    let (g, g_ls) = c.grad(han, ls, video);
    Ok((c.loss(), g, g_ls))
}

/// Step-wise decoder for inference.
#[derive(Debug, Clone, Copy)]
pub struct Decoder<'a> {
    pub han: &'a HanParams,
    pub ls: &'a LatentSpaceParams,
}

impl<'a> Decoder<'a> {
    pub fn new(han: &'a HanParams, ls: &'a LatentSpaceParams) -> Result<Self> {
        check_shapes(han, ls)?;
        Ok(Self { han, ls })
    }

    /// Encodes the video and returns the state before `#Start` is fed.
    pub fn start(&self, video: &ClipFeatureSequence, strategy: Strategy) -> Result<DecoderState> {
        let latent = project_video(&self.ls.t_v, video)?;
        let seg = segment_clips(latent.nrows(), strategy);
        let enc = EncoderCache::forward(self.han, latent.view(), &seg).encoding;
        let q = self.han.decoder.state_dim();
        Ok(DecoderState { cell: CellState { h: enc.initial_hidden, c: Array1::zeros(q) }, t: 0 })
    }

    /// Feeds `word`'s latent vector; returns the next state and the
    /// log-probabilities of the word that follows.
    pub fn step(&self, state: &DecoderState, word: usize) -> (DecoderState, Array1<f64>) {
        let (cell, _) = self.han.decoder.forward(self.ls.word_latent(word), &state.cell);
        let log_probs = emission_log_probs(self.han, cell.h.view());
        (DecoderState { cell, t: state.t + 1 }, log_probs)
    }
}

/// Emits the most probable word at each step until `#End` or `max_len`
/// words. Ties go to the lowest index; `#Start` is never emitted.
pub fn greedy_decode(
    han: &HanParams,
    ls: &LatentSpaceParams,
    video: &ClipFeatureSequence,
    strategy: Strategy,
    max_len: usize,
) -> Result<Vec<usize>> {
    let dec = Decoder::new(han, ls)?;
    let mut state = dec.start(video, strategy)?;
    let mut word = START;
    let mut out = Vec::new();
    while out.len() < max_len {
        let (next, log_probs) = dec.step(&state, word);
        state = next;
        let mut best = END;
        for (k, &lp) in log_probs.iter().enumerate().skip(END + 1) {
            if lp > log_probs[best] {
                best = k;
            }
        }
        if best == END {
            break;
        }
        out.push(best);
        word = best;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub tokens: Vec<usize>,
    /// Sum of step log-probabilities, including `#End` when it was emitted.
    pub log_prob: f64,
}

/// Beam search of width `k`. Hypotheses that reach `max_len` words without
/// `#End` are kept as truncated. Returns at most `k` hypotheses by
/// descending log-probability.
pub fn kbest_decode(
    han: &HanParams,
    ls: &LatentSpaceParams,
    video: &ClipFeatureSequence,
    strategy: Strategy,
    k: usize,
    max_len: usize,
) -> Result<Vec<Hypothesis>> {
    if k == 0 {
        return Err(Error::Config("beam width must be positive".into()));
    }
    let dec = Decoder::new(han, ls)?;
    let vocab = han.dims().vocab;
    let mut live = vec![(Vec::<usize>::new(), 0.0, dec.start(video, strategy)?)];
    let mut finished: Vec<Hypothesis> = Vec::new();
    for _ in 0..max_len {
        let mut candidates = Vec::with_capacity(live.len() * vocab);
        let mut next_states = Vec::with_capacity(live.len());
        for (h, (tokens, score, state)) in live.iter().enumerate() {
            let (next, log_probs) = dec.step(state, *tokens.last().unwrap_or(&START));
            next_states.push(next);
            for w in END..vocab {
                candidates.push((h, w, score + log_probs[w]));
            }
        }
        candidates.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(Ordering::Equal));
        candidates.truncate(k);
        let mut next_live = Vec::with_capacity(k);
        for (h, w, score) in candidates {
            let tokens = &live[h].0;
            if w == END {
                finished.push(Hypothesis { tokens: tokens.clone(), log_prob: score });
            } else {
                let mut extended = tokens.clone();
                extended.push(w);
                next_live.push((extended, score, next_states[h].clone()));
            }
        }
        live = next_live;
        if live.is_empty() {
            break;
        }
    }
    finished.extend(live.into_iter().map(|(tokens, log_prob, _)| Hypothesis { tokens, log_prob }));
    finished.sort_by(|a, b| b.log_prob.partial_cmp(&a.log_prob).unwrap_or(Ordering::Equal));
    finished.truncate(k);
    Ok(finished)
}
