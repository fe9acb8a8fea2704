//! Rule-based daily portfolios from ranked predictions.
//!
//! Each day the stocks are ranked by predicted probability of an up move;
//! the top `k` are bought (and the bottom `k` shorted in long-short mode)
//! with equal weights. A portfolio formed from day-`t` predictions earns
//! day `t + 1` returns. Transaction costs are charged on turnover against
//! the previous day's weights after they drift with realized returns.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::ReturnPanel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyPrediction {
    pub date: NaiveDate,
    pub stock: String,
    pub prob_up: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortfolioMode {
    #[default]
    LongShort,
    LongOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BacktestConfig {
    pub mode: PortfolioMode,
    pub k: usize,
    pub cost_bps: f64,
    /// Quote long-short returns per unit of gross (2) rather than long (1) notional.
    pub normalize_by_gross: bool,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        BacktestConfig {
            mode: PortfolioMode::LongShort,
            k: 10,
            cost_bps: 5.0,
            normalize_by_gross: false,
        }
    }
}

/// Holdings for one day and what they earned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyPortfolio {
    /// Day the returns were realized.
    pub date: NaiveDate,
    pub weights: BTreeMap<String, f64>,
    pub realized: BTreeMap<String, f64>,
    pub gross_return: f64,
    pub cost: f64,
    pub net_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub days: Vec<DailyPortfolio>,
    /// Benchmark return on each portfolio date.
    pub benchmark: Vec<f64>,
}

impl BacktestResult {
    pub fn net_returns(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.net_return).collect()
    }

    pub fn gross_returns(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.gross_return).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.days.iter().map(|d| d.date).collect()
    }
}

/// Long and short books for one day. Higher `prob_up` ranks first; ties
/// go to the lexicographically smaller identifier on both sides.
pub fn select(
    predictions: &[(&str, f64)],
    k: usize,
    mode: PortfolioMode,
) -> Result<(Vec<String>, Vec<String>)> {
    let need = match mode {
        PortfolioMode::LongShort => 2 * k,
        PortfolioMode::LongOnly => k,
    };
    if k == 0 || predictions.len() < need {
        return Err(Error::InsufficientUniverse {
            date: String::new(),
            have: predictions.len(),
            need: need.max(1),
        });
    }
    let mut by_up: Vec<&(&str, f64)> = predictions.iter().collect();
    by_up.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let long = by_up[..k].iter().map(|p| p.0.to_string()).collect();
    let short = match mode {
        PortfolioMode::LongOnly => Vec::new(),
        PortfolioMode::LongShort => {
            let mut by_down: Vec<&(&str, f64)> = predictions.iter().collect();
            by_down.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
            by_down[..k].iter().map(|p| p.0.to_string()).collect()
        }
    };
    Ok((long, short))
}

/// Equal weights: `+1/k` on the long book, `-1/k` on the short book.
pub fn target_weights(long: &[String], short: &[String]) -> BTreeMap<String, f64> {
    let mut w = BTreeMap::new();
    for s in long {
        w.insert(s.clone(), 1.0 / long.len() as f64);
    }
    for s in short {
        w.insert(s.clone(), -1.0 / short.len() as f64);
    }
    w
}

/// Previous weights after one day of returns, rescaled to their former gross exposure.
pub fn drift(weights: &BTreeMap<String, f64>, realized: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let gross_before: f64 = weights.values().map(|w| w.abs()).sum();
    let grown: BTreeMap<String, f64> = weights
        .iter()
        .map(|(s, w)| (s.clone(), w * (1.0 + realized.get(s).copied().unwrap_or(0.0))))
        .collect();
    let gross_after: f64 = grown.values().map(|w| w.abs()).sum();
    if gross_after == 0.0 {
        return grown;
    }
    let scale = gross_before / gross_after;
    grown.into_iter().map(|(s, w)| (s, w * scale)).collect()
}

/// Sum of `|target - previous|` over the union of names.
pub fn turnover(target: &BTreeMap<String, f64>, previous: &BTreeMap<String, f64>) -> f64 {
    let mut t = 0.0;
    for (s, w) in target {
        t += (w - previous.get(s).copied().unwrap_or(0.0)).abs();
    }
    for (s, w) in previous {
        if !target.contains_key(s) {
            t += w.abs();
        }
    }
    t
}

/// Books one day. `previous` holds yesterday's weights already drifted
/// (empty on the first day).
pub fn daily_return(
    date: NaiveDate,
    weights: BTreeMap<String, f64>,
    realized: &BTreeMap<String, f64>,
    previous: &BTreeMap<String, f64>,
    cost_bps: f64,
) -> Result<DailyPortfolio> {
    let mut held = BTreeMap::new();
    for s in weights.keys() {
        let r = realized
            .get(s)
            .ok_or_else(|| Error::MissingData(format!("no realized return for {s} on {date}")))?;
        held.insert(s.clone(), *r);
    }
    // longs then shorts, each in identifier order
    let long: f64 = weights.iter().filter(|(_, w)| **w > 0.0).map(|(s, w)| w * held[s]).sum();
    let short: f64 = weights.iter().filter(|(_, w)| **w < 0.0).map(|(s, w)| w * held[s]).sum();
    let gross_return = long + short;
    let cost = cost_bps / 1e4 * turnover(&weights, previous);
    Ok(DailyPortfolio {
        date,
        weights,
        realized: held,
        gross_return,
        cost,
        net_return: gross_return - cost,
    })
}

/// Market-cap weighted return on `day + 1` of stocks active on both days.
pub fn cap_weighted_return(panel: &ReturnPanel, day: usize) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for s in panel.active_on(day) {
        let (Some(cap), Some(r)) = (panel.market_cap(s, day), panel.get(s, day + 1)) else {
            if !panel.has_market_caps() {
                return Err(Error::MissingData("benchmark needs market caps".into()));
            }
            continue;
        };
        num += cap * r;
        den += cap;
    }
    if den == 0.0 {
        return Err(Error::MissingData(format!("no capitalization on day {day}")));
    }
    Ok(num / den)
}

/// Runs the daily strategy over every prediction date in order.
pub fn run_backtest(
    predictions: &[DailyPrediction],
    panel: &ReturnPanel,
    config: &BacktestConfig,
) -> Result<BacktestResult> {
    let index: BTreeMap<NaiveDate, usize> = panel.dates().iter().enumerate().map(|(i, d)| (*d, i)).collect();
    let stock_index: BTreeMap<&str, usize> =
        panel.stocks().iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut by_date: BTreeMap<NaiveDate, Vec<(&str, f64)>> = BTreeMap::new();
    for p in predictions {
        by_date.entry(p.date).or_default().push((p.stock.as_str(), p.prob_up));
    }
    let scale = match (config.mode, config.normalize_by_gross) {
        (PortfolioMode::LongShort, true) => 0.5,
        _ => 1.0,
    };

    let mut days = Vec::with_capacity(by_date.len());
    let mut benchmark = Vec::with_capacity(by_date.len());
    let mut previous: BTreeMap<String, f64> = BTreeMap::new();
    for (date, preds) in &by_date {
        let &t = index
            .get(date)
            .ok_or_else(|| Error::MissingData(format!("prediction date {date} not in panel")))?;
        if t + 1 >= panel.n_days() {
            return Err(Error::MissingData(format!("no trading day after {date}")));
        }
        let (long, short) = select(preds, config.k, config.mode).map_err(|e| match e {
            Error::InsufficientUniverse { have, need, .. } => Error::InsufficientUniverse {
                date: date.to_string(),
                have,
                need,
            },
            other => other,
        })?;
        let weights = target_weights(&long, &short);
        let mut realized = BTreeMap::new();
        for s in weights.keys() {
            if let Some(r) = stock_index.get(s.as_str()).and_then(|&i| panel.get(i, t + 1)) {
                realized.insert(s.clone(), r);
            }
        }
        let mut day = daily_return(panel.dates()[t + 1], weights, &realized, &previous, config.cost_bps)?;
        previous = drift(&day.weights, &day.realized);
        day.gross_return *= scale;
        day.cost *= scale;
        day.net_return *= scale;
        benchmark.push(match config.mode {
            PortfolioMode::LongShort => 0.0,
            PortfolioMode::LongOnly => cap_weighted_return(panel, t)?,
        });
        days.push(day);
    }
    Ok(BacktestResult { days, benchmark })
}

/// Oracle predictions: on each listed day, `prob_up` is the rank of each
/// active stock's next-day return scaled to `[0, 1]`.
pub fn perfect_foresight(panel: &ReturnPanel, days: std::ops::Range<usize>) -> Vec<DailyPrediction> {
    let mut out = Vec::new();
    for t in days {
        if t + 1 >= panel.n_days() {
            break;
        }
        let mut next: Vec<(usize, f64)> = panel
            .active_on(t)
            .filter_map(|s| panel.get(s, t + 1).map(|r| (s, r)))
            .collect();
        next.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let denom = (next.len().max(2) - 1) as f64;
        for (rank, (s, _)) in next.into_iter().enumerate() {
            out.push(DailyPrediction {
                date: panel.dates()[t],
                stock: panel.stocks()[s].clone(),
                prob_up: rank as f64 / denom,
            });
        }
    }
    out
}

/// Running sum of daily net returns (profit on one unit invested each day).
pub fn cumulative_profit(net: &[f64]) -> Vec<f64> {
    net.iter()
        .scan(0.0, |acc, r| {
            *acc += r;
            Some(*acc)
        })
        .collect()
}

/// `date,stock,weight,realized_return,net_portfolio_return`
pub fn write_portfolio_csv(days: &[DailyPortfolio], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "stock", "weight", "realized_return", "net_portfolio_return"])?;
    for d in days {
        let date = d.date.to_string();
        for (s, wt) in &d.weights {
            w.write_record([
                date.as_str(),
                s.as_str(),
                &wt.to_string(),
                &d.realized[s].to_string(),
                &d.net_return.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `date,cum_profit`
pub fn write_cumprofit_csv(dates: &[NaiveDate], cum: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["date", "cum_profit"])?;
    for (d, c) in dates.iter().zip(cum) {
        w.write_record([d.to_string(), c.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_cumprofit_csv(path: impl AsRef<Path>) -> Result<Vec<(NaiveDate, f64)>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize::<(NaiveDate, f64)>() {
        out.push(rec?);
    }
    Ok(out)
}
