//! Central-difference verification of the analytic gradients, reported per
//! parameter group.
//!
//! The relevance loss is only piecewise smooth: it is a minimum over
//! alignment paths of sums of Euclidean norms. Instances whose best path
//! passes through a zero-distance cell are skipped, and so is any coordinate
//! whose perturbation changes the selected path of some instance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::TrainingConfig;
use super::model::{group_of, Model, ModelDims};
use super::objective::{joint_grad, joint_loss};
use crate::corpus::{generate_synthetic, Instance, SyntheticConfig};
use crate::error::{Error, Result};
use crate::han::{coherence_grad, coherence_loss, Strategy};
use crate::latent_space::{AlignmentPath, Relevance};
use crate::params::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Batch mean of the relevance loss.
    Relevance,
    /// Batch mean of the coherence loss.
    Coherence,
    /// The full training objective.
    Joint,
}

impl Objective {
    pub fn all() -> [Objective; 3] {
        [Objective::Relevance, Objective::Coherence, Objective::Joint]
    }

    fn uses_relevance(self, cfg: &TrainingConfig) -> bool {
        match self {
            Objective::Relevance => true,
            Objective::Coherence => false,
            Objective::Joint => cfg.lambda1 > 0.0,
        }
    }
}

impl std::fmt::Display for Objective {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Objective::Relevance => "relevance",
            Objective::Coherence => "coherence",
            Objective::Joint => "joint",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub eps: f64,
    pub tolerance: f64,
    /// Lower bound on the denominator of the relative error, so entries
    /// whose true value is at rounding level do not dominate.
    pub floor: f64,
    /// Instances whose alignment passes this close to a zero-distance cell
    /// are skipped.
    pub min_distance: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self { eps: 1e-5, tolerance: 1e-4, floor: 1e-5, min_distance: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub group: String,
    pub checked: usize,
    /// Coordinates skipped because a perturbation switched alignment paths.
    pub skipped: usize,
    pub max_rel_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub objective: Objective,
    pub groups: Vec<GroupReport>,
    /// Instances left out because their alignment touches a zero-distance cell.
    pub skipped_instances: usize,
    pub checked_instances: usize,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.passed)
    }

    pub fn flagged(&self) -> Vec<&str> {
        self.groups.iter().filter(|g| !g.passed).map(|g| g.group.as_str()).collect()
    }

    pub fn max_rel_error(&self) -> f64 {
        self.groups.iter().map(|g| g.max_rel_error).fold(0.0, f64::max)
    }
}

fn mean_of(batch: &[&Instance], f: impl Fn(&Instance) -> Result<f64>) -> Result<f64> {
    let mut sum = 0.0;
    for inst in batch {
        sum += f(inst)?;
    }
    Ok(sum / batch.len() as f64)
}

pub fn objective_value(
    objective: Objective,
    batch: &[&Instance],
    model: &Model,
    cfg: &TrainingConfig,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    match objective {
        Objective::Relevance => mean_of(batch, |i| {
            Ok(Relevance::compute(&i.clips, &i.sentence, &model.latent, cfg.windowed)?.loss())
        }),
        Objective::Coherence => mean_of(batch, |i| {
            coherence_loss(&model.han, &model.latent, &i.clips, &i.sentence, model.strategy)
        }),
        Objective::Joint => Ok(joint_loss(batch, model, cfg)?.total),
    }
}

pub fn analytic_gradient(
    objective: Objective,
    batch: &[&Instance],
    model: &Model,
    cfg: &TrainingConfig,
) -> Result<Model> {
    if batch.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut grad = model.zeros_like();
    match objective {
        Objective::Relevance => {
            for i in batch {
                let r = Relevance::compute(&i.clips, &i.sentence, &model.latent, cfg.windowed)?;
                grad.latent.add_scaled(&r.grad(&i.clips, &i.sentence, &model.latent), 1.0);
            }
        }
        Objective::Coherence => {
            for i in batch {
                let (_, g, g_ls) = coherence_grad(
                    &model.han,
                    &model.latent,
                    &i.clips,
                    &i.sentence,
                    model.strategy,
                )?;
                grad.han.add_scaled(&g, 1.0);
                grad.latent.add_scaled(&g_ls, 1.0);
            }
        }
        Objective::Joint => return Ok(joint_grad(batch, model, cfg)?.1),
    }
    grad.scale(1.0 / batch.len() as f64);
    Ok(grad)
}

/// Central differences for every coordinate, with a per-coordinate flag
/// marking those that could not be differenced reliably.
#[derive(Debug, Clone)]
pub struct NumericGradient {
    pub grad: Model,
    pub skip: Vec<bool>,
}

fn paths(batch: &[&Instance], model: &Model, cfg: &TrainingConfig) -> Result<Vec<AlignmentPath>> {
    batch
        .iter()
        .map(|i| Ok(Relevance::compute(&i.clips, &i.sentence, &model.latent, cfg.windowed)?.path))
        .collect()
}

fn perturbed(model: &Model, index: usize, delta: f64) -> Model {
    let mut out = model.clone();
    let mut at = index;
    for (_, t) in out.tensors_mut() {
        if at < t.len() {
            t[at] += delta;
            break;
        }
        at -= t.len();
    }
    out
}

pub fn numeric_gradient(
    objective: Objective,
    batch: &[&Instance],
    model: &Model,
    cfg: &TrainingConfig,
    eps: f64,
) -> Result<NumericGradient> {
    let track = objective.uses_relevance(cfg);
    let base = if track { paths(batch, model, cfg)? } else { Vec::new() };
    let per: Vec<(f64, bool)> = (0..model.num_params())
        .into_par_iter()
        .map(|k| {
            let plus = perturbed(model, k, eps);
            let minus = perturbed(model, k, -eps);
            let value = (objective_value(objective, batch, &plus, cfg)?
                - objective_value(objective, batch, &minus, cfg)?)
                / (2.0 * eps);
            let switched = track
                && (paths(batch, &plus, cfg)? != base || paths(batch, &minus, cfg)? != base);
            Ok((value, switched))
        })
        .collect::<Result<_>>()?;
    let mut grad = model.zeros_like();
    grad.assign_flat(&per.iter().map(|p| p.0).collect::<Vec<_>>());
    Ok(NumericGradient { grad, skip: per.iter().map(|p| p.1).collect() })
}

/// Max relative error `|a - n| / max(|a|, |n|, floor)` per group.
pub fn compare_gradients(
    analytic: &Model,
    numeric: &NumericGradient,
    check: &GradCheckConfig,
) -> Vec<GroupReport> {
    let mut groups: Vec<GroupReport> = Vec::new();
    let mut at = 0;
    for ((name, a), (_, n)) in analytic.tensors().into_iter().zip(numeric.grad.tensors()) {
        let group = group_of(&name).to_string();
        if groups.last().is_none_or(|g| g.group != group) {
            groups.push(GroupReport {
                group,
                checked: 0,
                skipped: 0,
                max_rel_error: 0.0,
                passed: true,
            });
        }
        let report = groups.last_mut().expect("pushed above");
        for (k, (a, n)) in a.iter().zip(n).enumerate() {
            if numeric.skip[at + k] {
                report.skipped += 1;
                continue;
            }
            report.checked += 1;
            let err = (a - n).abs() / a.abs().max(n.abs()).max(check.floor);
            if !(err <= report.max_rel_error) {
                report.max_rel_error = err;
            }
        }
        at += a.len();
    }
    for g in &mut groups {
        g.passed = g.max_rel_error <= check.tolerance;
    }
    groups
}

/// Compares analytic and central-difference gradients of `objective` over
/// `batch`, after removing instances at a non-differentiable point.
pub fn grad_check(
    objective: Objective,
    batch: &[&Instance],
    model: &Model,
    cfg: &TrainingConfig,
    check: &GradCheckConfig,
) -> Result<GradCheckReport> {
    let mut kept = Vec::with_capacity(batch.len());
    for &inst in batch {
        if objective.uses_relevance(cfg) {
            let r = Relevance::compute(&inst.clips, &inst.sentence, &model.latent, cfg.windowed)?;
            if r.table.min_path_distance(&r.path) < check.min_distance {
                continue;
            }
        }
        kept.push(inst);
    }
    let skipped_instances = batch.len() - kept.len();
    if kept.is_empty() {
        return Ok(GradCheckReport {
            objective,
            groups: Vec::new(),
            skipped_instances,
            checked_instances: 0,
        });
    }
    let analytic = analytic_gradient(objective, &kept, model, cfg)?;
    let numeric = numeric_gradient(objective, &kept, model, cfg, check.eps)?;
    Ok(GradCheckReport {
        objective,
        groups: compare_gradients(&analytic, &numeric, check),
        skipped_instances,
        checked_instances: kept.len(),
    })
}

/// Checks every instance on its own and merges the reports: per-group
/// maxima of the error, summed counts.
pub fn grad_check_each(
    objective: Objective,
    instances: &[Instance],
    model: &Model,
    cfg: &TrainingConfig,
    check: &GradCheckConfig,
) -> Result<GradCheckReport> {
    let mut merged = GradCheckReport {
        objective,
        groups: Vec::new(),
        skipped_instances: 0,
        checked_instances: 0,
    };
    for inst in instances {
        let r = grad_check(objective, &[inst], model, cfg, check)?;
        merged.skipped_instances += r.skipped_instances;
        merged.checked_instances += r.checked_instances;
        for g in r.groups {
            match merged.groups.iter_mut().find(|m| m.group == g.group) {
                Some(m) => {
                    m.checked += g.checked;
                    m.skipped += g.skipped;
                    m.max_rel_error = m.max_rel_error.max(g.max_rel_error);
                    m.passed &= g.passed;
                }
                None => merged.groups.push(g),
            }
        }
    }
    Ok(merged)
}

/// The tiny configuration used for exhaustive differencing: latent 6,
/// state 8, vocabulary 10 (8 words plus the reserved pair), at most 3 words
/// and 6 clips per instance.
pub fn tiny_problem(seed: u64, instances: usize) -> Result<(Vec<Instance>, Model)> {
    let data = generate_synthetic(&SyntheticConfig {
        vocab_size: 8,
        latent_dim: 4,
        feature_dim: 5,
        clips_per_word: (1, 2),
        noise_std: 0.1,
        sentence_len: (1, 3),
        instances,
        seed,
    })?;
    let dims = ModelDims { feature: 5, vocab: data.vocab.len(), latent: 6, hidden: 8, attention: 4 };
    let model = Model::init(dims, Strategy::default(), &mut ChaCha8Rng::seed_from_u64(seed));
    Ok((data.instances, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Vec<Instance>, Model) {
        let data = generate_synthetic(&SyntheticConfig {
            vocab_size: 4,
            feature_dim: 3,
            latent_dim: 3,
            instances: 2,
            sentence_len: (1, 2),
            clips_per_word: (1, 2),
            ..SyntheticConfig::default()
        })
        .unwrap();
        let dims = ModelDims { feature: 3, vocab: data.vocab.len(), latent: 3, hidden: 3, attention: 2 };
        let model = Model::init(dims, Strategy::PairSplit, &mut ChaCha8Rng::seed_from_u64(4));
        (data.instances, model)
    }

    #[test]
    fn identical_gradients_pass() {
        let (inst, model) = setup();
        let numeric = NumericGradient { grad: model.clone(), skip: vec![false; model.num_params()] };
        let groups = compare_gradients(&model, &numeric, &GradCheckConfig::default());
        let names: Vec<&str> = groups.iter().map(|g| g.group.as_str()).collect();
        assert_eq!(
            names,
            [
                "t_v",
                "t_s",
                "clip_encoder",
                "segment_encoder",
                "bridge",
                "decoder",
                "emission"
            ]
        );
        assert!(groups.iter().all(|g| g.passed && g.max_rel_error == 0.0));
        drop(inst);
    }

    #[test]
    fn corrupted_t_s_is_the_only_flag() {
        let (inst, model) = setup();
        let batch: Vec<&Instance> = inst.iter().collect();
        let cfg = TrainingConfig::default();
        let mut analytic = analytic_gradient(Objective::Joint, &batch, &model, &cfg).unwrap();
        let numeric = numeric_gradient(Objective::Joint, &batch, &model, &cfg, 1e-5).unwrap();
        analytic.latent.t_s[[0, 2]] += 1.0;
        let groups = compare_gradients(&analytic, &numeric, &GradCheckConfig::default());
        let flagged: Vec<&str> =
            groups.iter().filter(|g| !g.passed).map(|g| g.group.as_str()).collect();
        assert_eq!(flagged, ["t_s"]);
    }

    #[test]
    fn tiny_model_passes_every_objective() {
        let (inst, model) = setup();
        let batch: Vec<&Instance> = inst.iter().collect();
        let cfg = TrainingConfig::default();
        for obj in Objective::all() {
            let r = grad_check(obj, &batch, &model, &cfg, &GradCheckConfig::default()).unwrap();
            assert!(r.passed(), "{obj}: {:?}", r.groups);
        }
    }
}
