//! The individual series transforms.

use rand::Rng;

use crate::augment::dtw::dtw_align;
use crate::error::{Error, Result};
use crate::interp::{resample, sample_linear, InterpKind, NaturalCubicSpline};
use crate::rng::{gaussian_draw, RngStream};
use crate::series::{pop_std, Series};

/// Lower clamp for time-warp knot magnitudes and the speed curve.
pub const MIN_WARP_SPEED: f64 = 0.05;

pub fn reverse(x: &Series) -> Series {
    let mut v = x.to_vec();
    v.reverse();
    Series::new(v).expect("reversal preserves finiteness")
}

pub fn jitter(x: &Series, sigma: f64, rng: &RngStream) -> Result<Series> {
    let noise = gaussian_draw(rng, 0.0, sigma, x.len())?;
    Series::new(x.iter().zip(noise).map(|(v, e)| v + e).collect())
}

/// Replaces every element by the mean of its block of `window` elements.
/// The final block may be shorter and is averaged over its own extent.
pub fn pool(x: &Series, window: usize) -> Result<Series> {
    if window == 0 {
        return Err(Error::InvalidParameter("pool window must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(x.len());
    for block in x.chunks(window) {
        let m = block.iter().sum::<f64>() / block.len() as f64;
        out.extend(std::iter::repeat_n(m, block.len()));
    }
    Series::new(out)
}

/// Rounds every value to the nearest of `levels` evenly spaced levels over
/// `[min, max]`; exact ties go to the lower level.
pub fn quantize(x: &Series, levels: usize) -> Result<Series> {
    if levels < 2 {
        return Err(Error::InvalidParameter("quantize needs >= 2 levels".into()));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Ok(x.clone());
    }
    let top = levels - 1;
    let step = (hi - lo) / top as f64;
    let out = x
        .iter()
        .map(|&v| {
            let pos = (v - lo) / step;
            let k = ((pos - 0.5).ceil().max(0.0) as usize).min(top);
            if k == top {
                hi
            } else {
                lo + k as f64 * step
            }
        })
        .collect();
    Series::new(out)
}

/// Hann taps `0.5 - 0.5 cos(2π(n+1)/(size+1))`, normalized to sum 1.
/// The zero-valued end points of the textbook window are dropped, so all
/// `size` taps contribute and `size = 1` is the identity.
pub fn hann_kernel(size: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..size)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * (n + 1) as f64 / (size + 1) as f64).cos())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Same-length smoothing with a normalized Hann kernel and edge-value padding.
pub fn convolve(x: &Series, kernel_size: usize) -> Result<Series> {
    if kernel_size == 0 || kernel_size.is_multiple_of(2) || kernel_size > x.len() {
        return Err(Error::InvalidKernel {
            size: kernel_size,
            len: x.len(),
        });
    }
    let kernel = hann_kernel(kernel_size);
    let half = kernel_size / 2;
    let last = x.len() as isize - 1;
    let out = (0..x.len() as isize)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let src = (i + k as isize - half as isize).clamp(0, last);
                    w * x[src as usize]
                })
                .sum()
        })
        .collect();
    Series::new(out)
}

/// Keeps the final `max(2, ⌈frac·L⌉)` elements and stretches them back to `L`.
pub fn magnify_with_fraction(x: &Series, frac: f64, interp: InterpKind) -> Result<Series> {
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::InvalidParameter(format!("magnify fraction {frac} outside (0, 1]")));
    }
    let len = x.len();
    if len < 2 {
        return Err(Error::DegenerateInput("magnify needs at least 2 points".into()));
    }
    let keep = ((frac * len as f64).ceil() as usize).clamp(2, len);
    if keep == len {
        return Ok(x.clone());
    }
    resample(&x[len - keep..], len, interp)
}

pub fn magnify(
    x: &Series,
    frac_lo: f64,
    frac_hi: f64,
    interp: InterpKind,
    rng: &RngStream,
) -> Result<Series> {
    if !(frac_lo > 0.0 && frac_lo <= frac_hi && frac_hi <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "magnify range [{frac_lo}, {frac_hi}] must satisfy 0 < lo <= hi <= 1"
        )));
    }
    let u: f64 = rng.rng().random();
    magnify_with_fraction(x, frac_lo + u * (frac_hi - frac_lo), interp)
}

/// Warped sampling positions for a series of `len` points.
///
/// A natural cubic spline through `magnitudes` (placed on evenly spaced knots
/// over `[0, len - 1]`) gives a speed per index; the trapezoidal running sum
/// of that speed, rescaled to end at `len - 1`, gives the timestamps.
pub fn warp_timestamps(len: usize, magnitudes: &[f64]) -> Result<Vec<f64>> {
    if len < 2 {
        return Ok(vec![0.0; len]);
    }
    if magnitudes.len() < 2 {
        return Err(Error::InvalidParameter("time warp needs >= 2 knots".into()));
    }
    let span = (len - 1) as f64;
    let knots = magnitudes.len();
    let knots_x: Vec<f64> = (0..knots).map(|k| k as f64 * span / (knots - 1) as f64).collect();
    let spline = NaturalCubicSpline::new(&knots_x, magnitudes)?;
    let speed: Vec<f64> = (0..len)
        .map(|t| spline.eval(t as f64).max(MIN_WARP_SPEED))
        .collect();
    let mut ts = Vec::with_capacity(len);
    let mut acc = 0.0;
    ts.push(0.0);
    for w in speed.windows(2) {
        acc += 0.5 * (w[0] + w[1]);
        ts.push(acc);
    }
    let scale = span / acc;
    for t in ts.iter_mut() {
        *t = (*t * scale).clamp(0.0, span);
    }
    ts[len - 1] = span;
    Ok(ts)
}

pub fn time_warp_with_magnitudes(x: &Series, magnitudes: &[f64]) -> Result<Series> {
    let ts = warp_timestamps(x.len(), magnitudes)?;
    Series::new(ts.iter().map(|&t| sample_linear(x, t)).collect())
}

/// Knot magnitudes ~ Normal(1, sigma²), clamped below at [`MIN_WARP_SPEED`].
pub fn warp_magnitudes(knots: usize, sigma: f64, rng: &RngStream) -> Result<Vec<f64>> {
    Ok(gaussian_draw(rng, 1.0, sigma, knots)?
        .into_iter()
        .map(|m| m.max(MIN_WARP_SPEED))
        .collect())
}

pub fn time_warp(x: &Series, knots: usize, sigma: f64, rng: &RngStream) -> Result<Series> {
    if knots < 2 || !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "time warp needs knots >= 2 and sigma >= 0 (got {knots}, {sigma})"
        )));
    }
    time_warp_with_magnitudes(x, &warp_magnitudes(knots, sigma, rng)?)
}

/// How SPAWNER's additive noise level is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScale {
    /// `sigma` is used as-is.
    #[default]
    Absolute,
    /// `sigma` is multiplied by the population std of the averaged pattern.
    RelativeToStd,
}

/// Averages `x1` and `x2` along their DTW path forced through
/// `(anchor, anchor)`, then stretches the result back to the input length.
pub fn spawner_average(x1: &Series, x2: &Series, anchor: usize, band_frac: f64) -> Result<Series> {
    if x1.len() != x2.len() {
        return Err(Error::Shape {
            expected: x1.len(),
            got: x2.len(),
        });
    }
    let path = dtw_align(x1, x2, Some((anchor, anchor)), band_frac)?;
    let avg: Vec<f64> = path.steps.iter().map(|&(i, j)| 0.5 * (x1[i] + x2[j])).collect();
    if avg.len() == x1.len() {
        return Series::new(avg);
    }
    resample(&avg, x1.len(), InterpKind::Linear)
}

pub fn spawner(
    x1: &Series,
    x2: &Series,
    noise_sigma: f64,
    noise_scale: NoiseScale,
    band_frac: f64,
    rng: &RngStream,
) -> Result<Series> {
    let len = x1.len();
    if len < 3 {
        return Err(Error::DegenerateInput("spawner needs series of length >= 3".into()));
    }
    let anchor = rng.derive(0).rng().random_range(1..=len - 2);
    let avg = spawner_average(x1, x2, anchor, band_frac)?;
    let sigma = match noise_scale {
        NoiseScale::Absolute => noise_sigma,
        NoiseScale::RelativeToStd => noise_sigma * pop_std(&avg),
    };
    let noise = gaussian_draw(&rng.derive(1), 0.0, sigma, len)?;
    Series::new(avg.iter().zip(noise).map(|(v, e)| v + e).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Series {
        Series::new(v.to_vec()).unwrap()
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(reverse(&s(&[1.0, 2.0, 3.0])).as_slice(), &[3.0, 2.0, 1.0]);
        assert_eq!(reverse(&s(&[5.0])).as_slice(), &[5.0]);
    }

    #[test]
    fn pool_blocks() {
        let r = pool(&s(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), 3).unwrap();
        assert_eq!(r.as_slice(), &[2.0, 2.0, 2.0, 5.0, 5.0, 5.0]);
        let r = pool(&s(&[1.0, 2.0, 3.0, 4.0, 6.0]), 3).unwrap();
        assert_eq!(r.as_slice(), &[2.0, 2.0, 2.0, 5.0, 5.0]);
        assert!(pool(&s(&[1.0]), 0).is_err());
    }

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize(&s(&[0.0, 0.4, 1.0]), 3).unwrap().as_slice(), &[0.0, 0.5, 1.0]);
        assert_eq!(
            quantize(&s(&[0.0, 0.24, 0.76, 1.0]), 2).unwrap().as_slice(),
            &[0.0, 0.0, 1.0, 1.0]
        );
        assert_eq!(quantize(&s(&[3.0, 3.0]), 25).unwrap().as_slice(), &[3.0, 3.0]);
        // exact midpoint goes down
        assert_eq!(quantize(&s(&[0.0, 0.5, 1.0]), 2).unwrap().as_slice(), &[0.0, 0.0, 1.0]);
        assert!(quantize(&s(&[0.0, 1.0]), 1).is_err());
    }

    #[test]
    fn hann_kernel_shape() {
        let k = hann_kernel(7);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..7 {
            assert!((k[i] - k[6 - i]).abs() < 1e-16);
        }
        assert!(k[3] > k[2] && k[2] > k[1] && k[1] > k[0] && k[0] > 0.0);
        assert_eq!(hann_kernel(1), vec![1.0]);
    }

    #[test]
    fn convolve_impulse_reproduces_kernel() {
        let mut v = vec![0.0; 41];
        v[20] = 1.0;
        let r = convolve(&s(&v), 7).unwrap();
        // hand-built taps: 0.5 - 0.5 cos(2π n / 8), n = 1..=7, sum = 4
        let hand: Vec<f64> = (1..=7)
            .map(|n| (0.5 - 0.5 * (std::f64::consts::PI * n as f64 / 4.0).cos()) / 4.0)
            .collect();
        for (k, h) in hand.iter().enumerate() {
            assert!((r[17 + k] - h).abs() < 1e-15);
        }
        assert!(r[..17].iter().chain(&r[24..]).all(|&v| v == 0.0));
    }

    #[test]
    fn convolve_keeps_ramp_interior_and_constants() {
        let ramp: Vec<f64> = (0..64).map(|i| 0.3 * i as f64 - 2.0).collect();
        let r = convolve(&s(&ramp), 7).unwrap();
        for i in 3..=60 {
            assert!((r[i] - ramp[i]).abs() < 1e-12, "index {i}");
        }
        let c = convolve(&s(&[1.25; 10]), 7).unwrap();
        assert!(c.iter().all(|&v| (v - 1.25).abs() < 1e-12));
    }

    #[test]
    fn convolve_rejects_bad_kernels() {
        assert!(matches!(convolve(&s(&[1.0; 5]), 7), Err(Error::InvalidKernel { size: 7, len: 5 })));
        assert!(convolve(&s(&[1.0; 9]), 4).is_err());
    }

    #[test]
    fn magnify_forced_fraction() {
        let x = s(&[9.0, 0.0, 1.0, 4.0]);
        let r = magnify_with_fraction(&x, 0.5, InterpKind::Linear).unwrap();
        assert_eq!(r.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(magnify_with_fraction(&x, 1.0, InterpKind::Linear).unwrap(), x);
        let c = magnify_with_fraction(&x, 0.5, InterpKind::Cubic).unwrap();
        assert_eq!(c.last(), 4.0);
        assert_eq!(c.first(), 1.0);
    }

    #[test]
    fn magnify_anchors_end() {
        let x = s(&(0..50).map(|i| ((i * 7) % 11) as f64).collect::<Vec<_>>());
        for k in 0..100 {
            let r = magnify(&x, 0.4, 0.8, InterpKind::Linear, &RngStream::new(k)).unwrap();
            assert_eq!(r.last(), x.last());
            assert_eq!(r.len(), x.len());
        }
    }

    #[test]
    fn time_warp_zero_sigma_is_identity() {
        let x = s(&(0..40).map(|i| (i as f64).sin()).collect::<Vec<_>>());
        let r = time_warp(&x, 4, 0.0, &RngStream::new(3)).unwrap();
        for (a, b) in r.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn warp_timestamps_monotone_for_extreme_knots() {
        let ts = warp_timestamps(100, &[0.05, 3.0, 0.05, 3.0]).unwrap();
        assert_eq!(ts[0], 0.0);
        assert_eq!(ts[99], 99.0);
        assert!(ts.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn spawner_identical_inputs() {
        let x = s(&[0.5, -1.0, 2.0, 0.0, 3.0, 1.0, 1.0, -0.5]);
        let r = spawner(&x, &x, 0.0, NoiseScale::Absolute, 0.1, &RngStream::new(11)).unwrap();
        assert_eq!(r, x);
    }

    #[test]
    fn spawner_constant_pair_averages() {
        let a = s(&[0.0; 4]);
        let b = s(&[2.0; 4]);
        for anchor in 1..=2 {
            let r = spawner_average(&a, &b, anchor, 0.1).unwrap();
            assert_eq!(r.as_slice(), &[1.0; 4]);
        }
        assert!(spawner(&s(&[1.0, 2.0]), &s(&[1.0, 2.0]), 0.5, NoiseScale::Absolute, 0.1, &RngStream::new(0)).is_err());
    }
}
