//! Grenander estimator: the maximum-likelihood monotone density.
//!
//! For an increasing density the estimate is the slope of the greatest
//! convex minorant of the ECDF, anchored at `(0, 0)` and `(1, 1)`. Pooling
//! adjacent slope violators on the left-limit points of the ECDF gives the
//! same minorant in one pass.

use crate::error::{invalid, Error, Result};

use super::density::{Direction, MonotoneDensity};

/// Fit from values already mapped to fit coordinates and sorted.
pub(crate) fn fit_sorted(sorted: &[f64], direction: Direction) -> MonotoneDensity {
    let n = sorted.len() as f64;
    // Left-limit points (v, #{u < v} / n) of the ECDF at distinct interior values.
    let mut xs = vec![0.0];
    let mut ys = vec![0.0];
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        if v > 0.0 && v < 1.0 {
            xs.push(v);
            ys.push(i as f64 / n);
        }
        while i < sorted.len() && sorted[i] == v {
            i += 1;
        }
    }
    xs.push(1.0);
    ys.push(1.0);

    // Pool adjacent violators: blocks of (width, mass) with slopes kept
    // non-decreasing.
    let mut blocks: Vec<(f64, f64, f64)> = Vec::with_capacity(xs.len());
    for j in 1..xs.len() {
        let mut block = (xs[j - 1], xs[j] - xs[j - 1], ys[j] - ys[j - 1]);
        while let Some(&(start, width, mass)) = blocks.last() {
            if mass / width >= block.2 / block.1 {
                blocks.pop();
                block = (start, width + block.1, mass + block.2);
            } else {
                break;
            }
        }
        blocks.push(block);
    }
    let mut knots: Vec<f64> = blocks.iter().map(|b| b.0).collect();
    knots.push(1.0);
    let levels = blocks.iter().map(|b| b.2 / b.1).collect();
    MonotoneDensity::step(direction, knots, levels)
}

/// Grenander fit in the given direction (right-continuous when increasing,
/// left-continuous when decreasing).
pub fn grenander_fit(samples: &[f64], direction: Direction) -> Result<MonotoneDensity> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("Grenander fit needs at least one sample".into()));
    }
    if let Some(z) = samples.iter().find(|z| !(0.0..=1.0).contains(*z)) {
        return invalid(format!("value {z} outside [0, 1]"));
    }
    let mut u: Vec<f64> = samples.iter().map(|&z| direction.to_fit(z)).collect();
    u.sort_by(f64::total_cmp);
    Ok(fit_sorted(&u, direction))
}
