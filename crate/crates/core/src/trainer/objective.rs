//! The joint objective: weighted relevance and coherence losses averaged
//! over a batch, plus a ridge penalty on every parameter.

use rayon::prelude::*;

use super::config::TrainingConfig;
use super::model::Model;
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::han::{coherence_grad, coherence_loss};
use crate::latent_space::{relevance_grad, relevance_loss};
use crate::params::ParamSet;

/// The objective split into its parts. `relevance` and `coherence` are batch
/// means; `regularizer` is the unweighted squared norm of all parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub total: f64,
    pub relevance: f64,
    pub coherence: f64,
    pub regularizer: f64,
}

impl LossParts {
    pub fn combine(relevance: f64, coherence: f64, regularizer: f64, cfg: &TrainingConfig) -> Self {
        let total =
            cfg.lambda1 * relevance + (1.0 - cfg.lambda1) * coherence + cfg.lambda2 * regularizer;
        Self { total, relevance, coherence, regularizer }
    }
}

fn check_batch(batch: &[&Instance]) -> Result<()> {
    if batch.is_empty() {
        Err(Error::EmptyCorpus)
    } else {
        Ok(())
    }
}

fn instance_losses(inst: &Instance, model: &Model, cfg: &TrainingConfig) -> Result<(f64, f64)> {
    let rel = relevance_loss(&inst.clips, &inst.sentence, &model.latent, cfg.windowed)?;
    let coh =
        coherence_loss(&model.han, &model.latent, &inst.clips, &inst.sentence, model.strategy)?;
    Ok((rel, coh))
}

/// Gradient of `lambda1 * E_r + (1 - lambda1) * E_c` for one instance. A
/// term whose weight is zero is not differentiated at all.
fn instance_grad(
    inst: &Instance,
    model: &Model,
    cfg: &TrainingConfig,
) -> Result<(f64, f64, Model)> {
    let mut grad = model.zeros_like();
    let rel = if cfg.lambda1 > 0.0 {
        let (rel, g) = relevance_grad(&inst.clips, &inst.sentence, &model.latent, cfg.windowed)?;
        grad.latent.add_scaled(&g, cfg.lambda1);
        rel
    } else {
        relevance_loss(&inst.clips, &inst.sentence, &model.latent, cfg.windowed)?
    };
    let w = 1.0 - cfg.lambda1;
    let coh = if w > 0.0 {
        let (coh, g_han, g_ls) =
            coherence_grad(&model.han, &model.latent, &inst.clips, &inst.sentence, model.strategy)?;
        grad.han.add_scaled(&g_han, w);
        grad.latent.add_scaled(&g_ls, w);
        coh
    } else {
        coherence_loss(&model.han, &model.latent, &inst.clips, &inst.sentence, model.strategy)?
    };
    Ok((rel, coh, grad))
}

fn mean_parts(per: impl Iterator<Item = (f64, f64)>, n: usize, model: &Model, cfg: &TrainingConfig) -> LossParts {
    let (rel, coh) = per.fold((0.0, 0.0), |(r, c), (a, b)| (r + a, c + b));
    LossParts::combine(rel / n as f64, coh / n as f64, model.squared_norm(), cfg)
}

pub fn joint_loss(batch: &[&Instance], model: &Model, cfg: &TrainingConfig) -> Result<LossParts> {
    check_batch(batch)?;
    let per: Vec<(f64, f64)> =
        batch.par_iter().map(|inst| instance_losses(inst, model, cfg)).collect::<Result<_>>()?;
    Ok(mean_parts(per.into_iter(), batch.len(), model, cfg))
}

/// The objective and its gradient. Per-instance gradients may be computed
/// on the current rayon pool; they are summed in batch order.
pub fn joint_grad(
    batch: &[&Instance],
    model: &Model,
    cfg: &TrainingConfig,
) -> Result<(LossParts, Model)> {
    check_batch(batch)?;
    let per: Vec<(f64, f64, Model)> =
        batch.par_iter().map(|inst| instance_grad(inst, model, cfg)).collect::<Result<_>>()?;
    let mut grad = model.zeros_like();
    for (_, _, g) in &per {
        grad.add_scaled(g, 1.0);
    }
    grad.scale(1.0 / batch.len() as f64);
    grad.add_scaled(model, 2.0 * cfg.lambda2);
    let parts = mean_parts(per.iter().map(|(r, c, _)| (*r, *c)), batch.len(), model, cfg);
    Ok((parts, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SyntheticConfig};
    use crate::han::Strategy;
    use crate::trainer::model::ModelDims;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Vec<Instance>, Model) {
        let data = generate_synthetic(&SyntheticConfig {
            vocab_size: 5,
            feature_dim: 4,
            latent_dim: 3,
            instances: 4,
            sentence_len: (2, 3),
            ..SyntheticConfig::default()
        })
        .unwrap();
        let dims = ModelDims { feature: 4, vocab: data.vocab.len(), latent: 3, hidden: 4, attention: 3 };
        let model = Model::init(dims, Strategy::EvenK(3), &mut ChaCha8Rng::seed_from_u64(2));
        (data.instances, model)
    }

    #[test]
    fn decomposition_holds() {
        let (inst, model) = setup();
        let batch: Vec<&Instance> = inst.iter().collect();
        let cfg = TrainingConfig::default();
        let p = joint_loss(&batch, &model, &cfg).unwrap();
        let recombined = cfg.lambda1 * p.relevance
            + (1.0 - cfg.lambda1) * p.coherence
            + cfg.lambda2 * p.regularizer;
        assert!((p.total - recombined).abs() < 1e-12);
        let (g, _) = joint_grad(&batch, &model, &cfg).unwrap();
        assert_eq!(g, p);
    }

    #[test]
    fn endpoints_select_one_loss() {
        let (inst, model) = setup();
        let batch: Vec<&Instance> = inst.iter().collect();
        let mut cfg = TrainingConfig { lambda1: 1.0, lambda2: 0.0, ..TrainingConfig::default() };
        let p = joint_loss(&batch, &model, &cfg).unwrap();
        assert_eq!(p.total, p.relevance);
        cfg.lambda1 = 0.0;
        let p = joint_loss(&batch, &model, &cfg).unwrap();
        assert_eq!(p.total, p.coherence);
    }

    #[test]
    fn zero_model_has_uniform_coherence() {
        let (inst, model) = setup();
        let model = model.zeros_like();
        let batch: Vec<&Instance> = inst.iter().collect();
        let p = joint_loss(&batch, &model, &TrainingConfig::default()).unwrap();
        assert_eq!(p.regularizer, 0.0);
        let mean_targets =
            inst.iter().map(|i| (i.sentence.len() + 1) as f64).sum::<f64>() / inst.len() as f64;
        let expect = mean_targets * (model.dims().vocab as f64).ln();
        assert!((p.coherence - expect).abs() < 1e-12);
    }

    #[test]
    fn relevance_only_leaves_han_with_ridge() {
        let (inst, model) = setup();
        let batch: Vec<&Instance> = inst.iter().collect();
        let cfg = TrainingConfig { lambda1: 1.0, lambda2: 0.01, ..TrainingConfig::default() };
        let (_, g) = joint_grad(&batch, &model, &cfg).unwrap();
        let mut ridge = model.han.clone();
        ridge.scale(2.0 * cfg.lambda2);
        assert_eq!(g.han, ridge);

        let mut expect = model.latent.zeros_like();
        for inst in &inst {
            let (_, r) = relevance_grad(&inst.clips, &inst.sentence, &model.latent, true).unwrap();
            expect.add_scaled(&r, 1.0);
        }
        expect.scale(1.0 / inst.len() as f64);
        expect.add_scaled(&model.latent, 2.0 * cfg.lambda2);
        let diff: f64 =
            expect.flatten().iter().zip(g.latent.flatten()).map(|(a, b)| (a - b).abs()).sum();
        assert!(diff < 1e-12);
    }

    #[test]
    fn coherence_only_ignores_relevance() {
        let (inst, model) = setup();
        let batch: Vec<&Instance> = inst.iter().collect();
        let cfg = TrainingConfig { lambda1: 0.0, lambda2: 0.0, ..TrainingConfig::default() };
        let (_, g) = joint_grad(&batch, &model, &cfg).unwrap();
        let mut expect = model.zeros_like();
        for inst in &inst {
            let (_, gh, gl) = coherence_grad(
                &model.han,
                &model.latent,
                &inst.clips,
                &inst.sentence,
                model.strategy,
            )
            .unwrap();
            expect.han.add_scaled(&gh, 1.0);
            expect.latent.add_scaled(&gl, 1.0);
        }
        expect.scale(1.0 / inst.len() as f64);
        assert_eq!(g, expect);
    }
}
