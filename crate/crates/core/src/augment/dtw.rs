//! Banded dynamic time warping with an optional forced waypoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A monotone alignment from `(0, 0)` to `(len_a - 1, len_b - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentPath {
    pub steps: Vec<(usize, usize)>,
    pub cost: f64,
}

/// Sakoe-Chiba half-width for the given lengths. Never narrower than the
/// length difference, otherwise the end cell would be unreachable.
pub fn band_half_width(len_a: usize, len_b: usize, band_frac: f64) -> usize {
    let w = (band_frac * len_a.max(len_b) as f64).ceil() as usize;
    w.max(len_a.abs_diff(len_b))
}

/// Minimum-cost alignment of `a` and `b` under `|a[i] - b[j]|`, restricted
/// to `|i - j| <= w`. With an anchor `(p, q)` the path is the concatenation
/// of the optimal prefix path ending at `(p, q)` and the optimal suffix path
/// starting there.
pub fn dtw_align(
    a: &[f64],
    b: &[f64],
    anchor: Option<(usize, usize)>,
    band_frac: f64,
) -> Result<AlignmentPath> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateInput("dtw needs non-empty series".into()));
    }
    if !(band_frac > 0.0 && band_frac <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "band fraction must lie in (0, 1], got {band_frac}"
        )));
    }
    let w = band_half_width(a.len(), b.len(), band_frac);
    let end = (a.len() - 1, b.len() - 1);
    match anchor {
        None => segment(a, b, (0, 0), end, w),
        Some((p, q)) => {
            if p >= a.len() || q >= b.len() {
                return Err(Error::InvalidParameter(format!(
                    "anchor ({p}, {q}) out of bounds for lengths {} and {}",
                    a.len(),
                    b.len()
                )));
            }
            if p.abs_diff(q) > w {
                return Err(Error::InfeasibleAnchor(p, q));
            }
            let head = segment(a, b, (0, 0), (p, q), w)?;
            let tail = segment(a, b, (p, q), end, w)?;
            let mut steps = head.steps;
            steps.extend_from_slice(&tail.steps[1..]);
            Ok(AlignmentPath {
                steps,
                cost: head.cost + tail.cost - (a[p] - b[q]).abs(),
            })
        }
    }
}

/// Optimal banded path between two cells, both inclusive.
fn segment(
    a: &[f64],
    b: &[f64],
    start: (usize, usize),
    end: (usize, usize),
    w: usize,
) -> Result<AlignmentPath> {
    let rows = end.0 - start.0 + 1;
    let cols = end.1 - start.1 + 1;
    let in_band = |i: usize, j: usize| i.abs_diff(j) <= w;
    let mut acc = vec![f64::INFINITY; rows * cols];
    for r in 0..rows {
        let i = start.0 + r;
        for c in 0..cols {
            let j = start.1 + c;
            if !in_band(i, j) {
                continue;
            }
            let d = (a[i] - b[j]).abs();
            let best = if r == 0 && c == 0 {
                0.0
            } else {
                let diag = if r > 0 && c > 0 { acc[(r - 1) * cols + c - 1] } else { f64::INFINITY };
                let up = if r > 0 { acc[(r - 1) * cols + c] } else { f64::INFINITY };
                let left = if c > 0 { acc[r * cols + c - 1] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[r * cols + c] = d + best;
        }
    }
    let cost = acc[rows * cols - 1];
    if !cost.is_finite() {
        return Err(Error::InfeasibleAnchor(end.0, end.1));
    }

    let mut steps = Vec::with_capacity(rows + cols);
    let (mut r, mut c) = (rows - 1, cols - 1);
    steps.push((start.0 + r, start.1 + c));
    while r > 0 || c > 0 {
        let diag = if r > 0 && c > 0 { acc[(r - 1) * cols + c - 1] } else { f64::INFINITY };
        let up = if r > 0 { acc[(r - 1) * cols + c] } else { f64::INFINITY };
        let left = if c > 0 { acc[r * cols + c - 1] } else { f64::INFINITY };
        // ties prefer the diagonal, then advancing in `a`
        if diag <= up && diag <= left {
            r -= 1;
            c -= 1;
        } else if up <= left {
            r -= 1;
        } else {
            c -= 1;
        }
        steps.push((start.0 + r, start.1 + c));
    }
    steps.reverse();
    Ok(AlignmentPath { steps, cost })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Exhaustive minimum over every monotone path, no band.
    pub(crate) fn brute_force_cost(a: &[f64], b: &[f64]) -> f64 {
        fn go(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
            let d = (a[i] - b[j]).abs();
            if i + 1 == a.len() && j + 1 == b.len() {
                return d;
            }
            let mut best = f64::INFINITY;
            if i + 1 < a.len() && j + 1 < b.len() {
                best = best.min(go(a, b, i + 1, j + 1));
            }
            if i + 1 < a.len() {
                best = best.min(go(a, b, i + 1, j));
            }
            if j + 1 < b.len() {
                best = best.min(go(a, b, i, j + 1));
            }
            d + best
        }
        go(a, b, 0, 0)
    }

    fn check_path(p: &AlignmentPath, a: &[f64], b: &[f64]) {
        assert_eq!(p.steps[0], (0, 0));
        assert_eq!(*p.steps.last().unwrap(), (a.len() - 1, b.len() - 1));
        for w in p.steps.windows(2) {
            let (di, dj) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            assert!(matches!((di, dj), (1, 0) | (0, 1) | (1, 1)));
        }
        let c: f64 = p.steps.iter().map(|&(i, j)| (a[i] - b[j]).abs()).sum();
        assert!((c - p.cost).abs() < 1e-12);
    }

    #[test]
    fn identical_series_align_diagonally() {
        let a = [0.3, 1.0, -2.0, 5.0, 5.0];
        let p = dtw_align(&a, &a, None, 1.0).unwrap();
        assert_eq!(p.cost, 0.0);
        assert_eq!(p.steps, (0..5).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn two_point_example() {
        let p = dtw_align(&[0.0, 0.0], &[1.0, 1.0], None, 1.0).unwrap();
        assert_eq!(p.cost, 2.0);
        assert_eq!(p.steps, vec![(0, 0), (1, 1)]);
        assert_eq!(brute_force_cost(&[0.0, 0.0], &[1.0, 1.0]), 2.0);
    }

    #[test]
    fn small_alphabet_matches_enumeration() {
        let mut series = Vec::new();
        for len in 1..=4usize {
            for code in 0..3usize.pow(len as u32) {
                let mut c = code;
                series.push((0..len).map(|_| { let v = (c % 3) as f64; c /= 3; v }).collect::<Vec<_>>());
            }
        }
        for a in &series {
            for b in &series {
                let p = dtw_align(a, b, None, 1.0).unwrap();
                assert_eq!(p.cost, brute_force_cost(a, b), "{a:?} {b:?}");
                check_path(&p, a, b);
            }
        }
    }

    #[test]
    fn anchor_is_visited_and_never_cheaper() {
        let a = [0.0, 2.0, 1.0, 0.0, 3.0, 1.0];
        let b = [1.0, 0.0, 2.0, 2.0, 0.0, 1.0];
        let free = dtw_align(&a, &b, None, 1.0).unwrap();
        for p in 0..a.len() {
            for q in 0..b.len() {
                let anchored = dtw_align(&a, &b, Some((p, q)), 1.0).unwrap();
                assert!(anchored.steps.contains(&(p, q)));
                assert!(anchored.cost >= free.cost);
                check_path(&anchored, &a, &b);
            }
        }
    }

    #[test]
    fn anchor_outside_band_is_rejected() {
        let a = [0.0; 20];
        let err = dtw_align(&a, &a, Some((2, 15)), 0.1).unwrap_err();
        assert!(matches!(err, Error::InfeasibleAnchor(2, 15)));
    }

    #[test]
    fn band_limits_path() {
        let a: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.5).cos()).collect();
        let p = dtw_align(&a, &b, None, 0.1).unwrap();
        assert!(p.steps.iter().all(|&(i, j)| i.abs_diff(j) <= 3));
        assert!(p.cost >= dtw_align(&a, &b, None, 1.0).unwrap().cost);
    }
}
