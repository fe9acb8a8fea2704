// Runs the desk preset end to end and prints the comparison table.
// Pass `--quick` for a seconds-long miniature of the same study.

use std::path::PathBuf;

use stockaug::classifier::TrainConfig;
use stockaug::experiment::{run, table_markdown, DataSource, ExperimentPlan};
use stockaug::pipeline::{SplitPlan, SynthParams};
use stockaug::plot::plot_bundle;
use stockaug::Result;

pub fn plan(quick: bool, output: PathBuf) -> ExperimentPlan {
    let desk = ExperimentPlan::desk();
    if !quick {
        return ExperimentPlan { output, ..desk };
    }
    ExperimentPlan {
        data: DataSource::Synthetic(SynthParams {
            n_stocks: 12,
            n_days: 300,
            ..SynthParams::default()
        }),
        splits: SplitPlan {
            split_length: 200,
            stride: 100,
            train_length: 150,
            test_length: 50,
            window_length: 20,
        },
        train: TrainConfig {
            max_epochs: 2,
            ..desk.train.clone()
        },
        backtest: stockaug::backtest::BacktestConfig { k: 3, ..desk.backtest.clone() },
        output,
        ..desk
    }
}

pub fn run_example(quick: bool) -> Result<ExperimentPlan> {
    let output = std::env::temp_dir().join(format!("stockaug-desk-{}-{quick}", std::process::id()));
    let plan = plan(quick, output);
    let res = run(&plan)?;
    print!("{}", table_markdown(&res.summary));
    let svg = plot_bundle(&plan.output, &plan.spec_names())?;
    std::fs::write(plan.output.join("cumprofit.svg"), svg).map_err(|e| stockaug::Error::io(&plan.output, e))?;
    println!("bundle written to {}", plan.output.display());
    Ok(plan)
}

fn main() -> Result<()> {
    let quick = std::env::args().any(|a| a == "--quick");
    run_example(quick).map(|_| ())
}
