//! Time-series augmentation for stock classification, with the evaluation
//! machinery around it: walk-forward window preparation, LSTM and logistic
//! classifiers trained from scratch, rule-based portfolio backtests and
//! information-ratio style metrics.
//!
//! The crate is organized bottom-up:
//!
//! - [`series`], [`rng`] and [`interp`] hold the shared numeric foundation.
//! - [`augment`] implements the eight augmentation methods and dataset-level
//!   augmentation.
//! - [`pipeline`] turns a return panel into standardized, labeled windows.
//! - [`classifier`] trains and evaluates the classifiers.
//! - [`backtest`] and [`metrics`] turn predictions into portfolios and tables.
//! - [`experiment`] runs the whole study and persists a result bundle;
//!   [`config`] and [`plot`] back the `stockaug` command-line tool.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod backtest;
pub mod classifier;
pub mod config;
pub mod error;
pub mod experiment;
pub mod interp;
pub mod metrics;
pub mod pipeline;
pub mod plot;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use series::Series;
