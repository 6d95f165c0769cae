//! Recognition accuracy with its substitution / insertion / deletion split,
//! corpus evaluation, the decoder-versus-latent-space consistency probe and
//! the retraining experiments.

mod edit;
mod evaluate;
mod probe;
mod sweep;

pub use edit::{accuracy, edit_breakdown, EditBreakdown};
pub use evaluate::{evaluate, evaluate_with, EvalReport, InstanceResult};
pub use probe::{
    average_ranks, consistency_probe, spearman, ProbeConfig, ProbePoint, ProbeReport, ProbeVideo,
};
pub use sweep::{
    compare_strategies, lambda_sweep, strategy_csv, sweep_csv, RunOutcome, StrategyRow, SweepRow,
    DEFAULT_LAMBDAS,
};
