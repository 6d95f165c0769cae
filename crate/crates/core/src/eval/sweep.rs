//! Retraining experiments: the λ₁ trade-off sweep and the segmentation
//! strategy comparison. Every run starts from the same seed.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::evaluate::evaluate;
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::han::Strategy;
use crate::trainer::{train, TrainingConfig};

pub const DEFAULT_LAMBDAS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

/// Outcome of one retraining run. A failed run keeps its error message and
/// reports NaN accuracies.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub mean_accuracy: f64,
    pub pooled_accuracy: f64,
    pub error: Option<String>,
}

fn run(train_set: &Dataset, eval_set: &Dataset, cfg: &TrainingConfig) -> RunOutcome {
    let result = train(train_set, cfg).and_then(|state| evaluate(&state.model, eval_set, cfg.strategy));
    match result {
        Ok(report) => RunOutcome {
            mean_accuracy: report.mean_accuracy,
            pooled_accuracy: report.pooled_accuracy(),
            error: None,
        },
        Err(e) => RunOutcome {
            mean_accuracy: f64::NAN,
            pooled_accuracy: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

fn run_all<T: Sync>(
    items: &[T],
    parallel: bool,
    f: impl Fn(&T) -> RunOutcome + Sync + Send,
) -> Vec<RunOutcome> {
    if parallel {
        items.par_iter().map(&f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub outcome: RunOutcome,
}

impl SweepRow {
    pub fn val_accuracy(&self) -> f64 {
        self.outcome.mean_accuracy
    }

    pub fn val_error(&self) -> f64 {
        1.0 - self.outcome.mean_accuracy
    }
}

/// Trains one model per λ₁ on `train_set` and evaluates each on `validation`.
/// `parallel` runs the trainings concurrently; results do not change.
pub fn lambda_sweep(
    train_set: &Dataset,
    validation: &Dataset,
    cfg: &TrainingConfig,
    lambdas: &[f64],
    parallel: bool,
) -> Result<Vec<SweepRow>> {
    if let Some(bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::Config(format!("lambda {bad} outside [0, 1]")));
    }
    let outcomes = run_all(lambdas, parallel, |&lambda1| {
        run(train_set, validation, &TrainingConfig { lambda1, ..cfg.clone() })
    });
    Ok(lambdas.iter().zip(outcomes).map(|(&lambda, outcome)| SweepRow { lambda, outcome }).collect())
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("lambda,val_accuracy,val_error\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.lambda, r.val_accuracy(), r.val_error());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyRow {
    pub strategy: Strategy,
    pub outcome: RunOutcome,
}

/// Trains and evaluates one model per segmentation strategy.
pub fn compare_strategies(
    train_set: &Dataset,
    test: &Dataset,
    cfg: &TrainingConfig,
    strategies: &[Strategy],
    parallel: bool,
) -> Vec<StrategyRow> {
    let outcomes = run_all(strategies, parallel, |&strategy| {
        run(train_set, test, &TrainingConfig { strategy, ..cfg.clone() })
    });
    strategies
        .iter()
        .zip(outcomes)
        .map(|(&strategy, outcome)| StrategyRow { strategy, outcome })
        .collect()
}

pub fn strategy_csv(rows: &[StrategyRow]) -> String {
    let mut out = String::from("strategy,test_accuracy,pooled_accuracy\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.strategy, r.outcome.mean_accuracy, r.outcome.pooled_accuracy
        );
    }
    out
}
