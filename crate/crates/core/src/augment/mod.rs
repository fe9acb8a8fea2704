//! Label-preserving augmentation of time-series samples.
//!
//! [`Method`] names one transform with its parameters; [`AugmentSpec`] binds
//! a method to a random stream. [`augment_dataset`] grows a labeled training
//! set by a whole multiple of its size.

pub mod dtw;
pub mod methods;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dtw::{band_half_width, dtw_align, AlignmentPath};
pub use methods::{
    convolve, hann_kernel, jitter, magnify, magnify_with_fraction, pool, quantize, reverse, spawner,
    spawner_average, time_warp, time_warp_with_magnitudes, warp_magnitudes, warp_timestamps,
    NoiseScale,
};

use crate::error::{Error, Result};
use crate::interp::InterpKind;
use crate::rng::RngStream;
use crate::series::Series;

/// One labeled training example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Series,
    pub label: u8,
}

/// Parameters for every method, defaulting to the full-scale settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentParams {
    pub jitter_sigma: f64,
    pub pool_window: usize,
    pub quantize_levels: usize,
    pub convolve_kernel: usize,
    pub time_warp_knots: usize,
    pub time_warp_sigma: f64,
    pub magnify_lo: f64,
    pub magnify_hi: f64,
    pub magnify_interp: InterpKind,
    pub spawner_sigma: f64,
    pub spawner_band: f64,
    pub spawner_noise_scale: NoiseScale,
}

impl Default for AugmentParams {
    fn default() -> Self {
        AugmentParams {
            jitter_sigma: 0.01,
            pool_window: 3,
            quantize_levels: 25,
            convolve_kernel: 7,
            time_warp_knots: 4,
            time_warp_sigma: 0.2,
            magnify_lo: 0.4,
            magnify_hi: 0.8,
            magnify_interp: InterpKind::Linear,
            spawner_sigma: 0.5,
            spawner_band: 0.1,
            spawner_noise_scale: NoiseScale::Absolute,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    None,
    Magnify { frac_lo: f64, frac_hi: f64, interp: InterpKind },
    Reverse,
    Jitter { sigma: f64 },
    Pool { window: usize },
    Quantize { levels: usize },
    Convolve { kernel_size: usize },
    TimeWarp { knots: usize, sigma: f64 },
    Spawner { noise_sigma: f64, band_frac: f64, noise_scale: NoiseScale },
    Compose { first: Box<Method>, second: Box<Method> },
}

impl Method {
    /// Parses `magnify`, `time_warp`, ... or a `+`-joined pair such as
    /// `magnify+time_warp`, taking parameters from `params`.
    pub fn from_name(name: &str, params: &AugmentParams) -> Result<Method> {
        if let Some((a, b)) = name.split_once('+') {
            return Ok(Method::Compose {
                first: Box::new(Method::from_name(a.trim(), params)?),
                second: Box::new(Method::from_name(b.trim(), params)?),
            });
        }
        let p = params;
        let m = match name {
            "none" => Method::None,
            "magnify" => Method::Magnify {
                frac_lo: p.magnify_lo,
                frac_hi: p.magnify_hi,
                interp: p.magnify_interp,
            },
            "reverse" => Method::Reverse,
            "jitter" => Method::Jitter { sigma: p.jitter_sigma },
            "pool" => Method::Pool { window: p.pool_window },
            "quantize" => Method::Quantize { levels: p.quantize_levels },
            "convolve" => Method::Convolve { kernel_size: p.convolve_kernel },
            "time_warp" => Method::TimeWarp {
                knots: p.time_warp_knots,
                sigma: p.time_warp_sigma,
            },
            "spawner" => Method::Spawner {
                noise_sigma: p.spawner_sigma,
                band_frac: p.spawner_band,
                noise_scale: p.spawner_noise_scale,
            },
            other => return Err(Error::UnknownSpec(other.to_string())),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn name(&self) -> String {
        match self {
            Method::None => "none".into(),
            Method::Magnify { .. } => "magnify".into(),
            Method::Reverse => "reverse".into(),
            Method::Jitter { .. } => "jitter".into(),
            Method::Pool { .. } => "pool".into(),
            Method::Quantize { .. } => "quantize".into(),
            Method::Convolve { .. } => "convolve".into(),
            Method::TimeWarp { .. } => "time_warp".into(),
            Method::Spawner { .. } => "spawner".into(),
            Method::Compose { first, second } => format!("{}+{}", first.name(), second.name()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            Method::Magnify { frac_lo, frac_hi, .. } => {
                if !(*frac_lo > 0.0 && frac_lo <= frac_hi && *frac_hi <= 1.0) {
                    return bad(format!("magnify range [{frac_lo}, {frac_hi}]"));
                }
            }
            Method::Jitter { sigma } if !(*sigma >= 0.0) => return bad(format!("jitter sigma {sigma}")),
            Method::Pool { window: 0 } => return bad("pool window 0".into()),
            Method::Quantize { levels } if *levels < 2 => return bad(format!("quantize levels {levels}")),
            Method::Convolve { kernel_size } if kernel_size % 2 == 0 => {
                return bad(format!("convolve kernel {kernel_size} must be odd"))
            }
            Method::TimeWarp { knots, sigma } if *knots < 2 || !(*sigma >= 0.0) => {
                return bad(format!("time warp knots {knots}, sigma {sigma}"))
            }
            Method::Spawner { noise_sigma, band_frac, .. }
                if !(*noise_sigma >= 0.0) || !(*band_frac > 0.0 && *band_frac <= 1.0) =>
            {
                return bad(format!("spawner sigma {noise_sigma}, band {band_frac}"))
            }
            Method::Compose { first, second } => {
                first.validate()?;
                second.validate()?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn needs_peers(&self) -> bool {
        match self {
            Method::Spawner { .. } => true,
            Method::Compose { first, second } => first.needs_peers() || second.needs_peers(),
            _ => false,
        }
    }
}

/// A method bound to the random stream it draws from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub method: Method,
    pub rng: RngStream,
}

/// Applies `spec` to `x`. `peer` is asked for a same-class series when the
/// method needs one; it receives a stream dedicated to that draw.
pub fn apply(spec: &AugmentSpec, x: &Series, peer: &dyn Fn(&RngStream) -> Result<Series>) -> Result<Series> {
    let rng = &spec.rng;
    match &spec.method {
        Method::None => Ok(x.clone()),
        Method::Magnify { frac_lo, frac_hi, interp } => magnify(x, *frac_lo, *frac_hi, *interp, rng),
        Method::Reverse => Ok(reverse(x)),
        Method::Jitter { sigma } => jitter(x, *sigma, rng),
        Method::Pool { window } => pool(x, *window),
        Method::Quantize { levels } => quantize(x, *levels),
        Method::Convolve { kernel_size } => convolve(x, *kernel_size),
        Method::TimeWarp { knots, sigma } => time_warp(x, *knots, *sigma, rng),
        Method::Spawner { noise_sigma, band_frac, noise_scale } => {
            let other = peer(&rng.derive(0))?;
            spawner(x, &other, *noise_sigma, *noise_scale, *band_frac, &rng.derive(1))
        }
        Method::Compose { first, second } => {
            let a = AugmentSpec {
                method: (**first).clone(),
                rng: rng.derive(0),
            };
            let b = AugmentSpec {
                method: (**second).clone(),
                rng: rng.derive(1),
            };
            let mid = apply(&a, x, peer)?;
            apply(&b, &mid, peer)
        }
    }
}

/// Returns the originals followed by `factor` augmented copies of each
/// sample, ordered by (sample index, replica index). Sample `i`, replica `r`
/// draws from `stream / i / r` regardless of scheduling.
pub fn augment_dataset(
    train: &[Sample],
    method: &Method,
    stream: &RngStream,
    factor: usize,
) -> Result<Vec<Sample>> {
    if factor == 0 {
        return Err(Error::InvalidParameter("augmentation factor must be >= 1".into()));
    }
    method.validate()?;

    let mut by_label: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, s) in train.iter().enumerate() {
        if s.label > 1 {
            return Err(Error::InvalidParameter(format!("label {} is not binary", s.label)));
        }
        by_label[s.label as usize].push(i);
    }
    if method.needs_peers() {
        for (label, members) in by_label.iter().enumerate() {
            if members.len() == 1 {
                return Err(Error::InsufficientPeers {
                    label: label as u8,
                    count: 1,
                });
            }
        }
    }

    let extra: Vec<Sample> = (0..train.len() * factor)
        .into_par_iter()
        .map(|job| {
            let (i, r) = (job / factor, job % factor);
            let src = &train[i];
            let spec = AugmentSpec {
                method: method.clone(),
                rng: stream.derive(i as u64).derive(r as u64),
            };
            let members = &by_label[src.label as usize];
            let peer = |s: &RngStream| -> Result<Series> {
                // uniform over same-label samples other than the source
                let pick = s.rng().random_range(0..members.len() - 1);
                let idx = members[pick + usize::from(members[pick] >= i)];
                Ok(train[idx].values.clone())
            };
            Ok(Sample {
                values: apply(&spec, &src.values, &peer)?,
                label: src.label,
            })
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(train.len() * (factor + 1));
    out.extend_from_slice(train);
    out.extend(extra);
    Ok(out)
}
