// Backtests perfect-foresight and inverted predictions on a synthetic
// panel and reports the table metrics for both.

use stockaug::backtest::{cumulative_profit, perfect_foresight, run_backtest, BacktestConfig, DailyPrediction, PortfolioMode};
use stockaug::metrics::{excess, MetricReport};
use stockaug::pipeline::{synth_panel, SynthParams};
use stockaug::{Result, RngStream};

pub fn run_example() -> Result<MetricReport> {
    let panel = synth_panel(
        &SynthParams {
            n_stocks: 30,
            n_days: 300,
            ..SynthParams::default()
        },
        &RngStream::new(11),
    )?;
    let oracle = perfect_foresight(&panel, 50..299);
    let inverted: Vec<DailyPrediction> = oracle
        .iter()
        .map(|p| DailyPrediction {
            prob_up: 1.0 - p.prob_up,
            ..p.clone()
        })
        .collect();

    let mut report = None;
    for mode in [PortfolioMode::LongShort, PortfolioMode::LongOnly] {
        let cfg = BacktestConfig {
            mode,
            k: 5,
            ..BacktestConfig::default()
        };
        for (name, preds) in [("oracle", &oracle), ("inverted", &inverted)] {
            let bt = run_backtest(preds, &panel, &cfg)?;
            let ex = excess(&bt.net_returns(), &bt.benchmark)?;
            let r = MetricReport::new(&ex, &[100.0], &[100.0])?;
            let cum = cumulative_profit(&bt.net_returns());
            println!(
                "{mode:?} {name:>8}: ann ret {:8.2}%  ann vol {:6.2}%  IR {}  final profit {:+.3}",
                r.ann_ret_pct,
                r.ann_vol_pct,
                r.ir.map_or("n/a".into(), |v| format!("{v:.2}")),
                cum.last().copied().unwrap_or(0.0)
            );
            if report.is_none() {
                report = Some(r);
            }
        }
    }
    Ok(report.expect("at least one backtest"))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
