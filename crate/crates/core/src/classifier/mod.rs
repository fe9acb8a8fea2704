//! Binary classifiers over fixed-length windows.
//!
//! Two architectures share one flat-weight representation ([`ModelParams`]):
//! a logistic-regression baseline and a single-layer LSTM with a two-logit
//! softmax head. Gradients are computed by hand (backpropagation through
//! time for the LSTM) and checked against finite differences in the tests.

pub mod checkpoint;
pub mod logistic;
pub mod lstm;
pub mod optim;
pub mod train;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use optim::RmsProp;
pub use train::{train, EpochLog, TrainConfig};

use crate::augment::Sample;
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    Lstm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub kind: ModelKind,
    pub input_len: usize,
    /// LSTM units; ignored by the logistic model.
    pub hidden: usize,
}

impl Architecture {
    pub fn lstm(input_len: usize, hidden: usize) -> Self {
        Architecture {
            kind: ModelKind::Lstm,
            input_len,
            hidden,
        }
    }

    pub fn logistic(input_len: usize) -> Self {
        Architecture {
            kind: ModelKind::Logistic,
            input_len,
            hidden: 0,
        }
    }

    pub fn param_count(&self) -> usize {
        match self.kind {
            ModelKind::Logistic => logistic::param_count(self.input_len),
            ModelKind::Lstm => lstm::param_count(self.hidden),
        }
    }
}

/// Predicted class probabilities for one window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub prob_up: f64,
}

impl Prediction {
    pub fn prob_down(&self) -> f64 {
        1.0 - self.prob_up
    }

    /// Class 1 iff `prob_up > 0.5`.
    pub fn class(&self) -> u8 {
        u8::from(self.prob_up > 0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub arch: Architecture,
    pub weights: Vec<f64>,
    /// Stream the initial weights were drawn from.
    pub init_stream: RngStream,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax probabilities and the cross-entropy of `label`.
pub(crate) fn softmax_ce(z: [f64; 2], label: u8) -> ([f64; 2], f64) {
    let m = z[0].max(z[1]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp()];
    let s = e[0] + e[1];
    let p = [e[0] / s, e[1] / s];
    let loss = s.ln() + m - z[usize::from(label)];
    (p, loss)
}

const GRAD_CHUNK: usize = 8;

impl ModelParams {
    pub fn init(arch: Architecture, stream: &RngStream) -> Self {
        let mut rng = stream.rng();
        let uniform = |bound: f64| rng.random_range(-bound..=bound);
        let weights = match arch.kind {
            ModelKind::Logistic => logistic::init(arch.input_len, uniform),
            ModelKind::Lstm => lstm::init(arch.hidden, uniform),
        };
        ModelParams {
            arch,
            weights,
            init_stream: stream.clone(),
        }
    }

    pub fn zeros(arch: Architecture) -> Self {
        ModelParams {
            arch,
            weights: vec![0.0; arch.param_count()],
            init_stream: RngStream::new(0),
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if self.weights.len() != self.arch.param_count() {
            return Err(Error::Shape {
                expected: self.arch.param_count(),
                got: self.weights.len(),
            });
        }
        if x.len() != self.arch.input_len {
            return Err(Error::Shape {
                expected: self.arch.input_len,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Prediction> {
        self.check(x)?;
        let prob_up = match self.arch.kind {
            ModelKind::Logistic => sigmoid(logistic::logit(&self.weights, x)),
            ModelKind::Lstm => {
                let z = lstm::logits(self.arch.hidden, &self.weights, x);
                softmax_ce(z, 0).0[1]
            }
        };
        Ok(Prediction { prob_up })
    }

    fn sample_grad(&self, s: &Sample, grad: &mut [f64]) -> f64 {
        match self.arch.kind {
            ModelKind::Logistic => logistic::accumulate_grad(&self.weights, &s.values, s.label, grad),
            ModelKind::Lstm => lstm::accumulate_grad(self.arch.hidden, &self.weights, &s.values, s.label, grad),
        }
    }

    /// Mean cross-entropy over `batch` and its gradient. Work is split into
    /// fixed chunks that are reduced in order, so the result does not depend
    /// on the number of threads.
    pub fn loss_and_grad(&self, batch: &[&Sample]) -> Result<(f64, Vec<f64>)> {
        if batch.is_empty() {
            return Err(Error::DegenerateInput("empty batch".into()));
        }
        for s in batch {
            self.check(&s.values)?;
        }
        let n = self.weights.len();
        let partials: Vec<(f64, Vec<f64>)> = batch
            .par_chunks(GRAD_CHUNK)
            .map(|chunk| {
                let mut g = vec![0.0; n];
                let loss = chunk.iter().map(|s| self.sample_grad(s, &mut g)).sum::<f64>();
                (loss, g)
            })
            .collect();
        let mut loss = 0.0;
        let mut grad = vec![0.0; n];
        for (l, g) in partials {
            loss += l;
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
        }
        let scale = 1.0 / batch.len() as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        Ok((loss * scale, grad))
    }

    /// Mean cross-entropy without gradients.
    pub fn loss(&self, samples: &[Sample]) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::DegenerateInput("empty sample set".into()));
        }
        let losses: Vec<f64> = samples
            .par_chunks(GRAD_CHUNK * 4)
            .map(|chunk| -> Result<f64> {
                chunk
                    .iter()
                    .map(|s| {
                        let p = self.forward(&s.values)?;
                        let hit = if s.label == 1 { p.prob_up } else { p.prob_down() };
                        Ok(-hit.max(f64::MIN_POSITIVE).ln())
                    })
                    .sum()
            })
            .collect::<Result<_>>()?;
        Ok(losses.iter().sum::<f64>() / samples.len() as f64)
    }
}

/// Order-preserving [`ModelParams::forward`] over many windows.
pub fn predict_batch(params: &ModelParams, windows: &[&[f64]]) -> Result<Vec<Prediction>> {
    windows.par_iter().map(|w| params.forward(w)).collect()
}

pub fn accuracy(params: &ModelParams, samples: &[Sample]) -> Result<f64> {
    let refs: Vec<&[f64]> = samples.iter().map(|s| s.values.as_slice()).collect();
    let preds = predict_batch(params, &refs)?;
    let hits = preds.iter().zip(samples).filter(|(p, s)| p.class() == s.label).count();
    Ok(hits as f64 / samples.len() as f64)
}
