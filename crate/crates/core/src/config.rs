//! TOML configuration for [`ExperimentPlan`].
//!
//! Every key is optional and defaults to the full-scale setup; unknown keys
//! are rejected with their name and position. Example:
//!
//! ```toml
//! seed = 7
//! specs = ["magnify", "time_warp", "magnify+time_warp"]
//! output = "results/full"
//!
//! [data]
//! source = "csv"
//! path = "data/prices.csv"
//!
//! [augment]
//! jitter_sigma = 0.01
//!
//! [backtest]
//! mode = "long_only"
//! k = 10
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::experiment::ExperimentPlan;

pub const DESK_TOML: &str = include_str!("../configs/desk.toml");
pub const FULL_TOML: &str = include_str!("../configs/full.toml");

pub fn parse_config(text: &str) -> Result<ExperimentPlan> {
    let plan: ExperimentPlan = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    plan.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(plan)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentPlan> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Named built-in configurations: `full` and `desk`.
pub fn preset(name: &str) -> Result<ExperimentPlan> {
    match name {
        "full" => parse_config(FULL_TOML),
        "desk" => parse_config(DESK_TOML),
        other => Err(Error::Config(format!("unknown preset `{other}` (expected full or desk)"))),
    }
}

pub fn to_toml(plan: &ExperimentPlan) -> Result<String> {
    toml::to_string(plan).map_err(|e| Error::Config(e.to_string()))
}
