use std::fmt::Write as _;
use std::path::PathBuf;

use lshan::trainer::{grad_check_each, tiny_problem, GradCheckConfig, Objective, TrainingConfig};
use serde::Serialize;

use crate::common::{write_file, write_run_manifest, CliResult, NumericFailure};

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of tiny instances to check.
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    /// Central-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub eps: f64,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Gradient magnitude below which errors are measured in absolute terms.
    #[arg(long, default_value_t = 1e-5)]
    pub floor: f64,
    /// Weight of the relevance loss inside the joint objective.
    #[arg(long, default_value_t = 0.6)]
    pub lambda1: f64,
    /// CSV with one row per objective and parameter group.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult {
    let (instances, model) = tiny_problem(args.seed, args.instances)?;
    let cfg = TrainingConfig { lambda1: args.lambda1, ..TrainingConfig::default() };
    cfg.validate()?;
    let check = GradCheckConfig { eps: args.eps, tolerance: args.tolerance, floor: args.floor, ..GradCheckConfig::default() };
    let mut csv = String::from("objective,group,max_rel_error,checked,skipped,passed\n");
    let mut failed = Vec::new();
    for objective in Objective::all() {
        let report = grad_check_each(objective, &instances, &model, &cfg, &check)?;
        println!(
            "{objective}: {} instances checked, {} skipped as degenerate",
            report.checked_instances, report.skipped_instances
        );
        for g in &report.groups {
            println!(
                "  {:<16} max rel error {:.3e}  ({} checked, {} skipped)  {}",
                g.group,
                g.max_rel_error,
                g.checked,
                g.skipped,
                if g.passed { "ok" } else { "FAIL" }
            );
            let _ = writeln!(
                csv,
                "{objective},{},{:e},{},{},{}",
                g.group, g.max_rel_error, g.checked, g.skipped, g.passed
            );
            if !g.passed {
                failed.push(format!("{objective}/{}", g.group));
            }
        }
    }
    if let Some(path) = &args.out {
        write_file(path, &csv)?;
        write_run_manifest(path, "gradcheck", &args, None)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(NumericFailure(format!("gradient mismatch in {}", failed.join(", "))).into())
    }
}
