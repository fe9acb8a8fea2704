//! From raw daily data to standardized, labeled walk-forward windows.

pub mod panel;
pub mod prepare;
pub mod split;

pub use panel::{
    business_days, compute_returns, read_panel, read_panel_csv, synth_panel, top_k_by_market_cap,
    write_returns, write_returns_csv, ReturnPanel, SynthParams,
};
pub use prepare::{
    fit_split_standardizer, fit_standardizer, label_panel, materialize, segment_windows,
    train_val_split, Labels, SkipRecord, SplitWindows, Standardizer, Window, WindowRef,
};
pub use split::{make_splits, split_count, Split, SplitPlan};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Which universe each split draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Universe {
    /// Every stock in the panel.
    #[default]
    Full,
    /// The `k` largest by market cap on each split's first training day.
    TopK(usize),
}

/// Everything needed to train and test on one split.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub split: Split,
    pub panel: ReturnPanel,
    pub standardizer: Standardizer,
    pub windows: SplitWindows,
    pub window_length: usize,
}

impl PreparedSplit {
    pub fn window(&self, r: &WindowRef) -> Window {
        materialize(&self.panel, &self.standardizer, r, self.window_length)
    }

    pub fn train_windows(&self) -> Vec<Window> {
        self.windows.train.iter().map(|r| self.window(r)).collect()
    }

    pub fn test_windows(&self) -> Vec<Window> {
        self.windows.test.iter().map(|r| self.window(r)).collect()
    }
}

pub fn prepare_split(
    panel: &ReturnPanel,
    split: &Split,
    plan: &SplitPlan,
    universe: Universe,
) -> Result<PreparedSplit> {
    let panel = match universe {
        Universe::Full => panel.clone(),
        Universe::TopK(k) => top_k_by_market_cap(panel, k, split.start())?,
    };
    let labels = label_panel(&panel)?;
    let standardizer = fit_split_standardizer(&panel, split)?;
    let windows = segment_windows(&panel, split, &labels, plan.window_length);
    Ok(PreparedSplit {
        split: split.clone(),
        panel,
        standardizer,
        windows,
        window_length: plan.window_length,
    })
}
