//! Walk-forward study periods.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of the walk-forward study periods, in trading days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitPlan {
    pub split_length: usize,
    pub stride: usize,
    pub train_length: usize,
    pub test_length: usize,
    pub window_length: usize,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan::full()
    }
}

impl SplitPlan {
    /// 1000-day periods advanced by 250, 750 train / 250 test, 240-step windows.
    pub const fn full() -> Self {
        SplitPlan {
            split_length: 1000,
            stride: 250,
            train_length: 750,
            test_length: 250,
            window_length: 240,
        }
    }

    /// Half-size plan for quick runs on synthetic data.
    pub const fn desk() -> Self {
        SplitPlan {
            split_length: 500,
            stride: 250,
            train_length: 375,
            test_length: 125,
            window_length: 120,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.train_length + self.test_length != self.split_length {
            return Err(Error::InvalidParameter(format!(
                "train {} + test {} must equal split length {}",
                self.train_length, self.test_length, self.split_length
            )));
        }
        if self.window_length == 0 || self.window_length >= self.train_length {
            return Err(Error::InvalidParameter(format!(
                "window length {} must be in [1, train length {})",
                self.window_length, self.train_length
            )));
        }
        if self.stride == 0 || self.test_length == 0 {
            return Err(Error::InvalidParameter("stride and test length must be positive".into()));
        }
        Ok(())
    }
}

/// One study period, as day ranges of the panel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub index: usize,
    pub train: Range<usize>,
    pub test: Range<usize>,
}

impl Split {
    pub fn start(&self) -> usize {
        self.train.start
    }

    pub fn end(&self) -> usize {
        self.test.end
    }
}

pub fn split_count(total_days: usize, plan: &SplitPlan) -> usize {
    if total_days < plan.split_length {
        0
    } else {
        (total_days - plan.split_length) / plan.stride + 1
    }
}

pub fn make_splits(total_days: usize, plan: &SplitPlan) -> Result<Vec<Split>> {
    plan.validate()?;
    if total_days < plan.split_length {
        return Err(Error::InsufficientHistory {
            have: total_days,
            need: plan.split_length,
        });
    }
    Ok((0..split_count(total_days, plan))
        .map(|k| {
            let start = k * plan.stride;
            let mid = start + plan.train_length;
            Split {
                index: k,
                train: start..mid,
                test: mid..start + plan.split_length,
            }
        })
        .collect())
}
