//! Versioned JSON checkpoints. Weights are written in shortest round-trip
//! form, so read-back is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{ModelParams, TrainConfig};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "stockaug-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub params: ModelParams,
    pub config: TrainConfig,
}

impl Checkpoint {
    pub fn new(params: ModelParams, config: TrainConfig) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            params,
            config,
        }
    }
}

pub fn write_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(ckpt)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ckpt: Checkpoint = serde_json::from_str(&text)?;
    if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint {} v{}",
            ckpt.format, ckpt.version
        )));
    }
    if ckpt.params.weights.len() != ckpt.params.arch.param_count() {
        return Err(Error::Checkpoint(format!(
            "{} weights for an architecture with {}",
            ckpt.params.weights.len(),
            ckpt.params.arch.param_count()
        )));
    }
    Ok(ckpt)
}
