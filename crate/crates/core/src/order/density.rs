use crate::error::{invalid, Result};

/// Monotonicity of a fitted density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    /// Maps `z` to the coordinate in which the fit is increasing.
    pub(crate) fn to_fit(self, z: f64) -> f64 {
        match self {
            Direction::Increasing => z,
            Direction::Decreasing => 1.0 - z,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Shape {
    /// `knots[0] = 0 < ... < knots[L] = 1`; `levels[j]` on `[knots[j], knots[j+1])`.
    Step { knots: Vec<f64>, levels: Vec<f64> },
    /// Weights of the `Beta(k, D - k + 1)` densities, `k = 1..=D`.
    Bernstein { weights: Vec<f64> },
}

/// A density on `[0, 1]` that is monotone in the declared direction.
///
/// Internally the representation is stored in fit coordinates (`z` for an
/// increasing fit, `1 - z` for a decreasing one), where it is increasing and
/// right-continuous; a decreasing density is therefore left-continuous in `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneDensity {
    pub(crate) direction: Direction,
    pub(crate) shape: Shape,
}

impl MonotoneDensity {
    pub fn uniform(direction: Direction) -> Self {
        Self { direction, shape: Shape::Step { knots: vec![0.0, 1.0], levels: vec![1.0] } }
    }

    pub(crate) fn step(direction: Direction, knots: Vec<f64>, levels: Vec<f64>) -> Self {
        debug_assert_eq!(knots.len(), levels.len() + 1);
        Self { direction, shape: Shape::Step { knots, levels } }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn is_step(&self) -> bool {
        matches!(self.shape, Shape::Step { .. })
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.eval_fit(self.direction.to_fit(z))
    }

    pub(crate) fn eval_fit(&self, u: f64) -> f64 {
        match &self.shape {
            Shape::Step { knots, levels } => {
                let inner = &knots[1..knots.len() - 1];
                levels[inner.partition_point(|&k| k <= u)]
            }
            Shape::Bernstein { weights } => {
                let d = weights.len();
                let pmf = binomial_pmf(d - 1, u);
                d as f64 * weights.iter().zip(&pmf).map(|(w, p)| w * p).sum::<f64>()
            }
        }
    }

    /// `int_0^1 f`.
    pub fn integral(&self) -> f64 {
        match &self.shape {
            Shape::Step { knots, levels } => {
                levels.iter().zip(knots.windows(2)).map(|(l, w)| l * (w[1] - w[0])).sum()
            }
            Shape::Bernstein { weights } => weights.iter().sum(),
        }
    }

    /// Mass on `[a, b]` in fit coordinates.
    pub(crate) fn mass_fit(&self, a: f64, b: f64) -> f64 {
        match &self.shape {
            Shape::Step { knots, levels } => levels
                .iter()
                .zip(knots.windows(2))
                .map(|(l, w)| l * (w[1].min(b) - w[0].max(a)).max(0.0))
                .sum(),
            Shape::Bernstein { weights } => {
                let (ca, cb) = (beta_cdfs(weights.len(), a), beta_cdfs(weights.len(), b));
                weights.iter().enumerate().map(|(k, w)| w * (cb[k] - ca[k])).sum()
            }
        }
    }

    /// Step pieces `(left, right, level)` in ascending `z`, or `None` for a
    /// smooth mixture.
    pub fn steps(&self) -> Option<Vec<(f64, f64, f64)>> {
        let Shape::Step { knots, levels } = &self.shape else { return None };
        let pieces = levels.iter().zip(knots.windows(2)).map(|(&l, w)| (w[0], w[1], l));
        Some(match self.direction {
            Direction::Increasing => pieces.collect(),
            Direction::Decreasing => pieces.rev().map(|(a, b, l)| (1.0 - b, 1.0 - a, l)).collect(),
        })
    }

    /// Mixture weights over `Beta(k, D - k + 1)` in `z` coordinates.
    pub fn bernstein_weights(&self) -> Option<Vec<f64>> {
        let Shape::Bernstein { weights } = &self.shape else { return None };
        Some(match self.direction {
            Direction::Increasing => weights.clone(),
            Direction::Decreasing => weights.iter().rev().copied().collect(),
        })
    }

    /// Piecewise-constant average of `self` over support intervals given in
    /// fit coordinates.
    pub(crate) fn discretize_fit(&self, support: &[f64]) -> Self {
        let mut knots = support.to_vec();
        knots.push(1.0);
        let levels = knots.windows(2).map(|w| self.mass_fit(w[0], w[1]) / (w[1] - w[0])).collect();
        Self::step(self.direction, knots, levels)
    }
}

/// Replaces an increasing density by its averages over
/// `[s_i, s_{i+1})`, `i < k`, and `[s_k, 1]`.
pub fn discretize_density(f: &MonotoneDensity, support: &[f64]) -> Result<MonotoneDensity> {
    if f.direction != Direction::Increasing {
        return invalid("discretization is defined for increasing densities");
    }
    if support.first() != Some(&0.0) {
        return invalid("support must start at 0");
    }
    if support.windows(2).any(|w| w[0] >= w[1]) || support.last().is_some_and(|&s| s >= 1.0) {
        return invalid("support must be strictly increasing and below 1");
    }
    Ok(f.discretize_fit(support))
}

/// Binomial(n, u) pmf at `0..=n`.
pub(crate) fn binomial_pmf(n: usize, u: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let v = 1.0 - u;
    let mut choose = 1.0;
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = choose * u.powi(j as i32) * v.powi((n - j) as i32);
        choose = choose * (n - j) as f64 / (j + 1) as f64;
    }
    out
}

/// CDFs of `Beta(k, D - k + 1)` at `u`, `k = 1..=D`: `P(Bin(D, u) >= k)`.
pub(crate) fn beta_cdfs(d: usize, u: f64) -> Vec<f64> {
    let pmf = binomial_pmf(d, u);
    let mut out = vec![0.0; d];
    let mut tail = 0.0;
    for k in (1..=d).rev() {
        tail += pmf[k];
        out[k - 1] = tail.min(1.0);
    }
    out
}
