//! Mini-batch training with early stopping on validation loss.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::augment::Sample;
use crate::classifier::{Architecture, ModelParams, RmsProp};
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub rho: f64,
    pub epsilon: f64,
    /// Elementwise gradient clip; `None` disables clipping.
    pub clip: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            batch_size: 128,
            patience: 10,
            max_epochs: 400,
            rho: 0.9,
            epsilon: 1e-7,
            clip: Some(5.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.batch_size > 0
            && self.patience > 0
            && self.max_epochs > 0
            && self.rho > 0.0
            && self.rho < 1.0
            && self.epsilon > 0.0
            && self.clip.is_none_or(|c| c > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid training config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Trains from a fresh initialization drawn from `stream / "init"`; epoch
/// `e` shuffles with `stream / "shuffle" / e`. Returns the weights of the
/// epoch with the lowest validation loss.
pub fn train(
    arch: Architecture,
    train_set: &[Sample],
    val_set: &[Sample],
    config: &TrainConfig,
    stream: &RngStream,
) -> Result<(ModelParams, Vec<EpochLog>)> {
    let init = ModelParams::init(arch, &stream.derive_named("init"));
    train_from(init, train_set, val_set, config, stream)
}

pub fn train_from(
    mut params: ModelParams,
    train_set: &[Sample],
    val_set: &[Sample],
    config: &TrainConfig,
    stream: &RngStream,
) -> Result<(ModelParams, Vec<EpochLog>)> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::DegenerateInput("training and validation sets must be non-empty".into()));
    }
    let mut opt = RmsProp::new(params.weights.len(), config.learning_rate, config.rho, config.epsilon);
    let mut log: Vec<EpochLog> = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut since_best = 0;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let shuffle = stream.derive_named("shuffle");

    for epoch in 1..=config.max_epochs {
        order.sort_unstable();
        order.shuffle(&mut shuffle.derive(epoch as u64).rng());
        let mut total = 0.0;
        for idx in order.chunks(config.batch_size) {
            let batch: Vec<&Sample> = idx.iter().map(|&i| &train_set[i]).collect();
            let (loss, mut grad) = params.loss_and_grad(&batch)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::TrainingDiverged { epoch, log });
            }
            if let Some(c) = config.clip {
                grad.iter_mut().for_each(|g| *g = g.clamp(-c, c));
            }
            opt.step(&mut params.weights, &grad);
            total += loss * batch.len() as f64;
        }
        let val_loss = params.loss(val_set)?;
        log.push(EpochLog {
            epoch,
            train_loss: total / train_set.len() as f64,
            val_loss,
        });
        if !val_loss.is_finite() || params.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::TrainingDiverged { epoch, log });
        }
        log::debug!("epoch {epoch}: train {:.5} val {val_loss:.5}", log[epoch - 1].train_loss);
        match &best {
            Some((b, _)) if val_loss >= *b => {
                since_best += 1;
                if since_best >= config.patience {
                    break;
                }
            }
            _ => {
                best = Some((val_loss, params.weights.clone()));
                since_best = 0;
            }
        }
    }
    if let Some((_, w)) = best {
        params.weights = w;
    }
    Ok((params, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{accuracy, ModelKind};
    use crate::series::Series;

    fn sample(v: Vec<f64>, label: u8) -> Sample {
        Sample { values: Series::new(v).unwrap(), label }
    }

    fn separable(n: usize, len: usize, seed: u64) -> Vec<Sample> {
        use rand::Rng;
        let mut rng = RngStream::new(seed).rng();
        (0..n)
            .map(|i| {
                let label = (i % 2) as u8;
                let shift = if label == 1 { 1.0 } else { -1.0 };
                sample((0..len).map(|_| shift + rng.random_range(-0.5..0.5)).collect(), label)
            })
            .collect()
    }

    #[test]
    fn logistic_fits_separable_toy_set() {
        let data = separable(32, 8, 1);
        let cfg = TrainConfig { learning_rate: 0.01, batch_size: 8, max_epochs: 200, patience: 200, ..Default::default() };
        let (m, log) = train(Architecture::logistic(8), &data, &data, &cfg, &RngStream::new(4)).unwrap();
        assert!(log.len() <= 200);
        assert!(accuracy(&m, &data).unwrap() >= 0.99);
    }

    #[test]
    fn early_stop_returns_first_epoch() {
        // validation labels are the opposite of training labels, so
        // validation loss rises as soon as the model learns
        let data = separable(32, 8, 2);
        let flipped: Vec<Sample> = data.iter().map(|s| sample(s.values.to_vec(), 1 - s.label)).collect();
        let cfg = TrainConfig { learning_rate: 0.05, batch_size: 32, patience: 1, max_epochs: 50, ..Default::default() };
        let stream = RngStream::new(8);
        let (m, log) = train(Architecture::logistic(8), &data, &flipped, &cfg, &stream).unwrap();
        assert_eq!(log.len(), 2);
        assert!(log[1].val_loss > log[0].val_loss);

        let one = TrainConfig { max_epochs: 1, ..cfg };
        let (m1, _) = train(Architecture::logistic(8), &data, &flipped, &one, &stream).unwrap();
        assert_eq!(m.weights, m1.weights);
    }

    #[test]
    fn same_seed_same_weights() {
        let data = separable(40, 6, 3);
        let cfg = TrainConfig { batch_size: 16, max_epochs: 3, ..Default::default() };
        let run = || train(Architecture::lstm(6, 3), &data[..30], &data[30..], &cfg, &RngStream::new(77)).unwrap();
        let (a, la) = run();
        let (b, lb) = run();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert_eq!(a.arch.kind, ModelKind::Lstm);
    }

    #[test]
    fn best_epoch_is_returned() {
        let data = separable(60, 6, 4);
        let cfg = TrainConfig { learning_rate: 0.05, batch_size: 10, max_epochs: 15, patience: 3, ..Default::default() };
        let (m, log) = train(Architecture::lstm(6, 3), &data[..40], &data[40..], &cfg, &RngStream::new(5)).unwrap();
        let best = log.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
        assert_eq!(m.loss(&data[40..]).unwrap(), best);
    }

    #[test]
    fn invalid_configs() {
        let data = separable(10, 4, 0);
        let cfg = TrainConfig { patience: 0, ..Default::default() };
        assert!(train(Architecture::logistic(4), &data, &data, &cfg, &RngStream::new(0)).is_err());
        assert!(train(Architecture::logistic(4), &data, &[], &TrainConfig::default(), &RngStream::new(0)).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let data = vec![sample(vec![1e200; 4], 1), sample(vec![-1e200; 4], 0)];
        let cfg = TrainConfig { learning_rate: 1e300, clip: None, max_epochs: 5, ..Default::default() };
        let err = train(Architecture::logistic(4), &data, &data, &cfg, &RngStream::new(0)).unwrap_err();
        assert!(matches!(err, Error::TrainingDiverged { .. }));
    }
}
