use std::path::PathBuf;

use lshan::eval::{compare_strategies, lambda_sweep, strategy_csv, sweep_csv, DEFAULT_LAMBDAS};
use lshan::han::Strategy;
use lshan::Split;
use serde::Serialize;

use crate::common::{load_split, write_file, write_run_manifest, CliResult, ConfigFlags, UsageError};

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated relevance weights; defaults to 0,0.2,...,1.
    #[arg(long, value_delimiter = ',', conflicts_with = "strategies")]
    pub lambdas: Option<Vec<f64>>,
    /// Comma-separated segmentation strategies to compare instead of weights.
    #[arg(long, value_delimiter = ',')]
    #[serde(serialize_with = "strategies_str")]
    pub strategies: Option<Vec<Strategy>>,
    /// Split the models are scored on; validation for weights, test for strategies.
    #[arg(long)]
    pub eval_split: Option<Split>,
    /// Train the runs concurrently.
    #[arg(long)]
    pub parallel: bool,
    /// Output CSV.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigFlags,
}

fn strategies_str<S: serde::Serializer>(v: &Option<Vec<Strategy>>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_seq(v.iter().map(|x| x.to_string())),
        None => s.serialize_none(),
    }
}

pub fn run(args: Args) -> CliResult {
    let cfg = args.config.resolve()?;
    let train = load_split(&args.data, Split::Train, None)?;
    let csv = match &args.strategies {
        Some(strategies) => {
            if strategies.is_empty() {
                return Err(UsageError("--strategies needs at least one value".into()).into());
            }
            let eval = load_split(&args.data, args.eval_split.unwrap_or(Split::Test), Some(&train.vocab))?;
            let rows = compare_strategies(&train, &eval, &cfg, strategies, args.parallel);
            for r in &rows {
                report_line(&r.strategy.to_string(), r.outcome.mean_accuracy, &r.outcome.error);
            }
            strategy_csv(&rows)
        }
        None => {
            let lambdas = args.lambdas.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());
            if lambdas.is_empty() {
                return Err(UsageError("--lambdas needs at least one value".into()).into());
            }
            let eval =
                load_split(&args.data, args.eval_split.unwrap_or(Split::Validation), Some(&train.vocab))?;
            let rows = lambda_sweep(&train, &eval, &cfg, &lambdas, args.parallel)?;
            for r in &rows {
                report_line(&format!("lambda1={}", r.lambda), r.val_accuracy(), &r.outcome.error);
            }
            sweep_csv(&rows)
        }
    };
    write_file(&args.out, &csv)?;
    write_run_manifest(&args.out, "sweep", &args, Some(&cfg))?;
    Ok(())
}

fn report_line(label: &str, accuracy: f64, error: &Option<String>) {
    match error {
        None => println!("{label:<16} accuracy {accuracy:.4}"),
        Some(e) => println!("{label:<16} failed: {e}"),
    }
}
