//! Standardization, next-day median labels and window segmentation.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::augment::Sample;
use crate::error::{Error, Result};
use crate::pipeline::panel::ReturnPanel;
use crate::pipeline::split::Split;
use crate::rng::RngStream;
use crate::series::Series;

/// Scalar mean and population std pooled over a split's training range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mu_train: f64,
    pub sigma_train: f64,
}

impl Standardizer {
    pub fn apply(&self, r: f64) -> f64 {
        (r - self.mu_train) / self.sigma_train
    }
}

pub fn fit_standardizer(values: &[f64]) -> Result<Standardizer> {
    if values.len() < 2 {
        return Err(Error::DegenerateStandardizer);
    }
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let sigma = (values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::DegenerateStandardizer);
    }
    Ok(Standardizer {
        mu_train: mu,
        sigma_train: sigma,
    })
}

/// Fits on every active return inside `split.train`.
pub fn fit_split_standardizer(panel: &ReturnPanel, split: &Split) -> Result<Standardizer> {
    let mut pool = Vec::new();
    for s in 0..panel.n_stocks() {
        for t in split.train.clone() {
            if let Some(r) = panel.get(s, t) {
                pool.push(r);
            }
        }
    }
    fit_standardizer(&pool)
}

/// Class of each stock's return on each day relative to that day's
/// cross-sectional median: 1 iff strictly above.
///
/// The label of a window ending on day `t` is `labels.get(s, t + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    classes: Vec<Vec<Option<u8>>>,
}

impl Labels {
    pub fn get(&self, stock: usize, day: usize) -> Option<u8> {
        self.classes.get(stock)?.get(day).copied().flatten()
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Labels every active (stock, day). Days with no active stock carry no
/// labels; a day with exactly one active stock has no median.
pub fn label_panel(panel: &ReturnPanel) -> Result<Labels> {
    let mut classes = vec![vec![None; panel.n_days()]; panel.n_stocks()];
    let mut buf = Vec::with_capacity(panel.n_stocks());
    for day in 0..panel.n_days() {
        buf.clear();
        buf.extend(panel.active_on(day).map(|s| panel.get(s, day).unwrap()));
        match buf.len() {
            0 => continue,
            1 => return Err(Error::UndefinedMedian { day }),
            _ => {}
        }
        let med = median(&mut buf);
        for s in panel.active_on(day) {
            classes[s][day] = Some(u8::from(panel.get(s, day).unwrap() > med));
        }
    }
    Ok(Labels { classes })
}

/// A window by reference: stock index, the panel day it ends on, and the
/// label of the following day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowRef {
    pub stock: usize,
    pub end: usize,
    pub label: u8,
}

/// A materialized, standardized input window.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub stock: String,
    pub end_date: chrono::NaiveDate,
    pub values: Series,
    pub label: u8,
}

impl Window {
    pub fn to_sample(&self) -> Sample {
        Sample {
            values: self.values.clone(),
            label: self.label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub split: usize,
    pub stock: String,
    pub active_days: usize,
    pub required_days: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitWindows {
    pub train: Vec<WindowRef>,
    pub test: Vec<WindowRef>,
    pub skipped: Vec<SkipRecord>,
}

/// Enumerates training and test windows of one split.
///
/// Training windows end on days whose next day is still in the training
/// range. Test windows end on the last training day through the
/// second-to-last test day, so every test label falls in the test range;
/// their history may reach back into training days.
pub fn segment_windows(
    panel: &ReturnPanel,
    split: &Split,
    labels: &Labels,
    window_length: usize,
) -> SplitWindows {
    let mut out = SplitWindows {
        train: Vec::new(),
        test: Vec::new(),
        skipped: Vec::new(),
    };
    let w = window_length;
    for s in 0..panel.n_stocks() {
        let act = panel.active(s);
        let lo = act.start.max(split.start());
        let hi = act.end.min(split.end());
        let active_days = hi.saturating_sub(lo);
        if active_days < w + 1 {
            if active_days > 0 {
                out.skipped.push(SkipRecord {
                    split: split.index,
                    stock: panel.stocks()[s].clone(),
                    active_days,
                    required_days: w + 1,
                });
            }
            continue;
        }
        // window [t - w + 1, t] and label day t + 1 must lie in [lo, hi)
        let first_end = lo + w - 1;
        let last_end = hi - 2;
        for t in first_end..=last_end {
            let Some(label) = labels.get(s, t + 1) else { continue };
            let r = WindowRef { stock: s, end: t, label };
            if t + 1 < split.train.end {
                out.train.push(r);
            } else if t + 1 < split.test.end {
                out.test.push(r);
            }
        }
    }
    out
}

pub fn materialize(panel: &ReturnPanel, std: &Standardizer, r: &WindowRef, window_length: usize) -> Window {
    let row = panel.row(r.stock);
    let values = row[r.end + 1 - window_length..=r.end].iter().map(|&v| std.apply(v)).collect();
    Window {
        stock: panel.stocks()[r.stock].clone(),
        end_date: panel.dates()[r.end],
        values: Series::new(values).expect("window lies inside the active range"),
        label: r.label,
    }
}

/// Uniform shuffle, then the first `⌊ratio·N⌋` items train and the rest validate.
pub fn train_val_split<T: Clone>(items: &[T], ratio: f64, rng: &RngStream) -> Result<(Vec<T>, Vec<T>)> {
    if items.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "need at least 5 windows to split, got {}",
            items.len()
        )));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!("split ratio {ratio} outside (0, 1)")));
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut rng.rng());
    let cut = ((ratio * items.len() as f64).floor() as usize).clamp(1, items.len() - 1);
    let train = order[..cut].iter().map(|&i| items[i].clone()).collect();
    let val = order[cut..].iter().map(|&i| items[i].clone()).collect();
    Ok((train, val))
}
