use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::edit::{edit_breakdown, EditBreakdown};
use crate::corpus::{Dataset, Instance};
use crate::error::{Error, Result};
use crate::han::{greedy_decode, Strategy};
use crate::trainer::Model;

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceResult {
    pub id: String,
    pub clips: usize,
    pub hypothesis: Vec<usize>,
    pub reference: Vec<usize>,
    pub breakdown: EditBreakdown,
    pub accuracy: f64,
    pub decode_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub strategy: Strategy,
    pub instances: Vec<InstanceResult>,
    /// Mean of the per-instance accuracies.
    pub mean_accuracy: f64,
    /// S, I, D and N summed over the corpus.
    pub pooled: EditBreakdown,
    pub decode_seconds: f64,
}

impl EvalReport {
    /// `1 - (ΣS + ΣI + ΣD) / ΣN`.
    pub fn pooled_accuracy(&self) -> f64 {
        self.pooled.accuracy()
    }

    /// One row per instance: `instance_id,n,m,hyp_len,S,I,D,accuracy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance_id,n,m,hyp_len,S,I,D,accuracy\n");
        for r in &self.instances {
            let b = &r.breakdown;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.id,
                r.clips,
                r.reference.len(),
                r.hypothesis.len(),
                b.substitutions,
                b.insertions,
                b.deletions,
                r.accuracy
            );
        }
        out
    }
}

fn evaluate_one(
    model: &Model,
    inst: &Instance,
    strategy: Strategy,
    max_len: Option<usize>,
) -> Result<InstanceResult> {
    let started = Instant::now();
    let max_len = max_len.unwrap_or(inst.clips.len());
    let hypothesis = greedy_decode(&model.han, &model.latent, &inst.clips, strategy, max_len)?;
    let decode_seconds = started.elapsed().as_secs_f64();
    let reference = inst.sentence.tokens().to_vec();
    let breakdown = edit_breakdown(&hypothesis, &reference)?;
    Ok(InstanceResult {
        id: inst.id.clone(),
        clips: inst.clips.len(),
        accuracy: breakdown.accuracy(),
        hypothesis,
        reference,
        breakdown,
        decode_seconds,
    })
}

/// Greedy-decodes every instance with `strategy`, at most as many words as
/// the video has clips.
pub fn evaluate(model: &Model, dataset: &Dataset, strategy: Strategy) -> Result<EvalReport> {
    evaluate_with(model, dataset, strategy, None)
}

/// As [`evaluate`] with an explicit decode length cap.
pub fn evaluate_with(
    model: &Model,
    dataset: &Dataset,
    strategy: Strategy,
    max_len: Option<usize>,
) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let instances: Vec<InstanceResult> = dataset
        .instances
        .par_iter()
        .map(|inst| evaluate_one(model, inst, strategy, max_len))
        .collect::<Result<_>>()?;
    let mean_accuracy =
        instances.iter().map(|r| r.accuracy).sum::<f64>() / instances.len() as f64;
    let mut pooled = EditBreakdown::default();
    for r in &instances {
        pooled.substitutions += r.breakdown.substitutions;
        pooled.insertions += r.breakdown.insertions;
        pooled.deletions += r.breakdown.deletions;
        pooled.reference_len += r.breakdown.reference_len;
    }
    let decode_seconds = instances.iter().map(|r| r.decode_seconds).sum();
    Ok(EvalReport { strategy, instances, mean_accuracy, pooled, decode_seconds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SyntheticConfig, END};
    use crate::trainer::ModelDims;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn data() -> Dataset {
        generate_synthetic(&SyntheticConfig { instances: 6, ..SyntheticConfig::default() })
            .unwrap()
    }

    fn model(data: &Dataset) -> Model {
        let dims = ModelDims {
            feature: data.feature_dim().unwrap(),
            vocab: data.vocab.len(),
            latent: 4,
            hidden: 5,
            attention: 3,
        };
        Model::init(dims, Strategy::default(), &mut ChaCha8Rng::seed_from_u64(1))
    }

    #[test]
    fn mean_matches_instances() {
        let data = data();
        let report = evaluate(&model(&data), &data, Strategy::default()).unwrap();
        assert_eq!(report.instances.len(), 6);
        let mean = report.instances.iter().map(|r| r.accuracy).sum::<f64>() / 6.0;
        assert!((report.mean_accuracy - mean).abs() < 1e-12);
        assert_eq!(report.to_csv().lines().count(), 7);
    }

    #[test]
    fn immediate_end_scores_zero() {
        let data = data();
        let mut m = model(&data);
        m.han.emission_b[END] = 1e3;
        let report = evaluate(&m, &data, Strategy::default()).unwrap();
        for r in &report.instances {
            assert!(r.hypothesis.is_empty());
            assert_eq!(r.breakdown.insertions, r.reference.len());
            assert_eq!(r.accuracy, 0.0);
        }
        assert_eq!(report.mean_accuracy, 0.0);
    }
}
