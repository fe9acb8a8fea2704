//! Financial and classification metrics.
//!
//! Annualization uses 252 trading days and the arithmetic mean, so the
//! information ratio is exactly `ann_ret / ann_vol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRADING_DAYS: f64 = 252.0;

/// Elementwise `portfolio - benchmark`.
pub fn excess(portfolio: &[f64], benchmark: &[f64]) -> Result<Vec<f64>> {
    if portfolio.len() != benchmark.len() {
        return Err(Error::Alignment(portfolio.len(), benchmark.len()));
    }
    Ok(portfolio.iter().zip(benchmark).map(|(p, b)| p - b).collect())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// `(ann_ret_pct, ann_vol_pct)` of a daily excess series.
pub fn annualize(excess: &[f64]) -> Result<(f64, f64)> {
    if excess.len() < 2 {
        return Err(Error::InsufficientHistory { have: excess.len(), need: 2 });
    }
    Ok((
        mean(excess) * TRADING_DAYS * 100.0,
        sample_std(excess) * TRADING_DAYS.sqrt() * 100.0,
    ))
}

pub fn information_ratio(excess: &[f64]) -> Result<f64> {
    let (ret, vol) = annualize(excess)?;
    if vol == 0.0 {
        return Err(Error::DegenerateBenchmark);
    }
    Ok(ret / vol)
}

/// `(downside_risk_pct, dir)` from the zero-floored root mean square.
pub fn downside_ir(excess: &[f64]) -> Result<(f64, f64)> {
    let (ret, _) = annualize(excess)?;
    if !excess.iter().any(|&x| x < 0.0) {
        return Err(Error::UndefinedDownside);
    }
    let dd = (excess.iter().map(|x| x.min(0.0).powi(2)).sum::<f64>() / excess.len() as f64).sqrt();
    let risk = dd * TRADING_DAYS.sqrt() * 100.0;
    Ok((risk, ret / risk))
}

/// `(accuracy_pct, f1_pct)` with F1 taken for class 1.
pub fn classification_metrics(labels: &[u8], predictions: &[u8]) -> Result<(f64, f64)> {
    if labels.len() != predictions.len() {
        return Err(Error::Alignment(labels.len(), predictions.len()));
    }
    if labels.is_empty() {
        return Err(Error::DegenerateInput("no predictions".into()));
    }
    let (mut tp, mut fp, mut fneg, mut correct) = (0usize, 0usize, 0usize, 0usize);
    for (&y, &p) in labels.iter().zip(predictions) {
        if y == p {
            correct += 1;
        }
        match (y == 1, p == 1) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
            _ => {}
        }
    }
    let acc = correct as f64 / labels.len() as f64 * 100.0;
    let f1 = if tp == 0 {
        0.0
    } else {
        200.0 * tp as f64 / (2 * tp + fp + fneg) as f64
    };
    Ok((acc, f1))
}

/// Mean and sample standard deviation across splits.
pub fn aggregate_splits(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::DegenerateInput("no splits".into()));
    }
    Ok((mean(values), sample_std(values)))
}

/// One row of the comparison table. Ratios are `None` when undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub ann_ret_pct: f64,
    pub ann_vol_pct: f64,
    pub ir: Option<f64>,
    pub downside_risk_pct: Option<f64>,
    pub dir: Option<f64>,
    pub acc_mean: f64,
    pub acc_std: f64,
    pub f1_mean: f64,
    pub f1_std: f64,
}

impl MetricReport {
    /// Builds a report from the concatenated daily excess series and per-split classification scores.
    pub fn new(excess: &[f64], accuracies: &[f64], f1s: &[f64]) -> Result<Self> {
        let (ann_ret_pct, ann_vol_pct) = annualize(excess)?;
        let ir = information_ratio(excess).ok();
        let (downside_risk_pct, dir) = match downside_ir(excess) {
            Ok((r, d)) => (Some(r), Some(d)),
            Err(_) => (None, None),
        };
        let (acc_mean, acc_std) = aggregate_splits(accuracies)?;
        let (f1_mean, f1_std) = aggregate_splits(f1s)?;
        Ok(MetricReport {
            ann_ret_pct,
            ann_vol_pct,
            ir,
            downside_risk_pct,
            dir,
            acc_mean,
            acc_std,
            f1_mean,
            f1_std,
        })
    }

    pub const HEADER: [&'static str; 9] = [
        "Ann ret", "Ann vol", "IR", "D. Risk", "DIR", "Acc", "Acc std", "F1", "F1 std",
    ];

    /// Cells in table order, two decimals, `n/a` for undefined ratios.
    pub fn cells(&self) -> Vec<String> {
        let f = |x: f64| format!("{x:.2}");
        let o = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), f);
        vec![
            f(self.ann_ret_pct),
            f(self.ann_vol_pct),
            o(self.ir),
            o(self.downside_risk_pct),
            o(self.dir),
            f(self.acc_mean),
            f(self.acc_std),
            f(self.f1_mean),
            f(self.f1_std),
        ]
    }
}
