//! Linear resampling and natural cubic splines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::Series;

/// How a shortened series is stretched back to its original length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpKind {
    #[default]
    Linear,
    Cubic,
}

/// Value of `x` at fractional index `pos`, clamped to `[0, len - 1]`.
pub fn sample_linear(x: &[f64], pos: f64) -> f64 {
    let last = x.len() - 1;
    if pos <= 0.0 {
        return x[0];
    }
    let i = pos.floor() as usize;
    if i >= last {
        return x[last];
    }
    let frac = pos - i as f64;
    x[i] + frac * (x[i + 1] - x[i])
}

/// Resample `x` to `target_len` points evenly spaced over `[0, len - 1]`.
pub fn linear_interp(x: &[f64], target_len: usize) -> Result<Series> {
    resample(x, target_len, InterpKind::Linear)
}

pub fn resample(x: &[f64], target_len: usize, kind: InterpKind) -> Result<Series> {
    if x.len() < 2 || target_len < 2 {
        return Err(Error::DegenerateInput(format!(
            "interpolation needs at least 2 input and 2 output points (got {} -> {})",
            x.len(),
            target_len
        )));
    }
    let span = (x.len() - 1) as f64;
    let denom = (target_len - 1) as f64;
    let positions = (0..target_len).map(|k| k as f64 * span / denom);
    let values = match kind {
        InterpKind::Linear => positions.map(|p| sample_linear(x, p)).collect(),
        InterpKind::Cubic => {
            let knots_x: Vec<f64> = (0..x.len()).map(|i| i as f64).collect();
            let spline = NaturalCubicSpline::new(&knots_x, x)?;
            let mut v: Vec<f64> = positions.map(|p| spline.eval(p)).collect();
            // pin endpoints against rounding in the cubic terms
            v[0] = x[0];
            v[target_len - 1] = x[x.len() - 1];
            v
        }
    };
    Series::new(values)
}

/// Interpolating cubic spline with zero second derivative at both ends.
#[derive(Debug, Clone)]
pub struct NaturalCubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(knots_x: &[f64], knots_y: &[f64]) -> Result<Self> {
        let n = knots_x.len();
        if n < 2 || knots_y.len() != n {
            return Err(Error::InvalidKnots(format!(
                "need >= 2 knots with matching x/y lengths (got {} and {})",
                n,
                knots_y.len()
            )));
        }
        if knots_x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidKnots("knot x positions must be strictly increasing".into()));
        }
        if knots_x.iter().chain(knots_y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidKnots("non-finite knot".into()));
        }

        let mut second = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm over the interior second derivatives.
            let m = n - 2;
            let h: Vec<f64> = knots_x.windows(2).map(|w| w[1] - w[0]).collect();
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for k in 0..m {
                let i = k + 1;
                diag[k] = 2.0 * (h[i - 1] + h[i]);
                upper[k] = h[i];
                rhs[k] = 6.0
                    * ((knots_y[i + 1] - knots_y[i]) / h[i] - (knots_y[i] - knots_y[i - 1]) / h[i - 1]);
            }
            for k in 1..m {
                let lower = h[k];
                let w = lower / diag[k - 1];
                diag[k] -= w * upper[k - 1];
                rhs[k] -= w * rhs[k - 1];
            }
            let mut sol = vec![0.0; m];
            sol[m - 1] = rhs[m - 1] / diag[m - 1];
            for k in (0..m - 1).rev() {
                sol[k] = (rhs[k] - upper[k] * sol[k + 1]) / diag[k];
            }
            second[1..n - 1].copy_from_slice(&sol);
        }

        Ok(NaturalCubicSpline {
            xs: knots_x.to_vec(),
            ys: knots_y.to_vec(),
            second,
        })
    }

    /// Evaluates the curve; outside the knot range the end pieces are extended.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&x| x <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let h = x1 - x0;
        let a = x1 - t;
        let b = t - x0;
        m0 * a * a * a / (6.0 * h)
            + m1 * b * b * b / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * b
    }

    pub fn second_derivatives(&self) -> &[f64] {
        &self.second
    }
}
