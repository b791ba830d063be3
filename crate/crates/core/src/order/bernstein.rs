//! Monotone Bernstein-polynomial density fits.
//!
//! The density is a mixture `sum_k w_k Beta(k, D - k + 1)`, increasing when
//! the weights are. Writing `w_k = sum_{j <= k} u_j / (D - j + 1)` with `u` on
//! the simplex makes the constraint set a simplex; the CDF is then linear in
//! `u` with columns `G_j(x) = sum_{k >= j} I_x(k, D - k + 1) / (D - j + 1)`,
//! and `u` is chosen by least squares against the ECDF at the sample points.

use crate::error::{invalid, Error, Result};

use super::density::{binomial_pmf, Direction, MonotoneDensity, Shape};
use super::qp::simplex_qp;

/// Polynomial degree used by default.
pub const BERNSTEIN_DEGREE: usize = 20;

const RIDGE: f64 = 1e-10;

/// Design row `G_1(x), ..., G_D(x)`.
pub(crate) fn design_row(d: usize, x: f64) -> Vec<f64> {
    let pmf = binomial_pmf(d, x);
    // tail1[j] = P(Bin >= j), tail2[j] = sum_{i >= j} tail1[i]
    let mut row = vec![0.0; d];
    let (mut tail1, mut tail2) = (0.0, 0.0);
    for j in (1..=d).rev() {
        tail1 += pmf[j];
        tail2 += tail1.min(1.0);
        row[j - 1] = tail2 / (d - j + 1) as f64;
    }
    row
}

/// Converts simplex coordinates to mixture weights.
pub(crate) fn weights_from_simplex(u: &[f64]) -> Vec<f64> {
    let d = u.len();
    let mut acc = 0.0;
    u.iter()
        .enumerate()
        .map(|(j, &v)| {
            acc += v / (d - j) as f64;
            acc
        })
        .collect()
}

/// Normal equations of the least-squares problem, accumulated per sample.
#[derive(Debug, Clone)]
pub(crate) struct BernsteinDesign {
    degree: usize,
    /// Samples in fit coordinates, sorted, with their design rows.
    samples: Vec<(f64, Vec<f64>)>,
    gram: Vec<f64>,
    warm: Option<Vec<f64>>,
}

impl BernsteinDesign {
    pub(crate) fn new(degree: usize) -> Self {
        Self { degree, samples: Vec::new(), gram: vec![0.0; degree * degree], warm: None }
    }

    pub(crate) fn len(&self) -> usize {
        self.samples.len()
    }

    pub(crate) fn push(&mut self, u: f64) {
        let row = design_row(self.degree, u);
        let d = self.degree;
        for i in 0..d {
            for j in 0..d {
                self.gram[i * d + j] += row[i] * row[j];
            }
        }
        let pos = self.samples.partition_point(|s| s.0 <= u);
        self.samples.insert(pos, (u, row));
    }

    pub(crate) fn sorted_values(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        self.samples.iter().map(|s| s.0)
    }

    /// Fits the weights; falls back to the uniform density when the solver
    /// fails.
    pub(crate) fn fit(&mut self, direction: Direction) -> MonotoneDensity {
        let d = self.degree;
        let n = self.samples.len();
        if n == 0 {
            return MonotoneDensity::uniform(direction);
        }
        let nf = n as f64;
        let mut c = vec![0.0; d];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j < n && self.samples[j].0 == self.samples[i].0 {
                j += 1;
            }
            let ecdf = j as f64 / nf;
            for s in &self.samples[i..j] {
                for (ck, rk) in c.iter_mut().zip(&s.1) {
                    *ck += ecdf * rk / nf;
                }
            }
            i = j;
        }
        let trace: f64 = (0..d).map(|k| self.gram[k * d + k]).sum::<f64>() / nf;
        let ridge = RIDGE * (trace / d as f64) + 1e-14;
        let mut q: Vec<f64> = self.gram.iter().map(|g| g / nf).collect();
        for k in 0..d {
            q[k * d + k] += ridge;
        }
        match simplex_qp(&q, &c, self.warm.as_deref()) {
            Some(sol) => {
                let weights = weights_from_simplex(&sol.x);
                self.warm = Some(sol.x);
                MonotoneDensity { direction, shape: Shape::Bernstein { weights } }
            }
            None => {
                self.warm = None;
                MonotoneDensity::uniform(direction)
            }
        }
    }
}

/// Least-squares monotone Bernstein fit of degree `degree`.
pub fn bernstein_fit(samples: &[f64], direction: Direction, degree: usize) -> Result<MonotoneDensity> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("Bernstein fit needs at least one sample".into()));
    }
    if degree == 0 {
        return invalid("degree must be positive");
    }
    if let Some(z) = samples.iter().find(|z| !(0.0..=1.0).contains(*z)) {
        return invalid(format!("value {z} outside [0, 1]"));
    }
    let mut design = BernsteinDesign::new(degree);
    for &z in samples {
        design.push(direction.to_fit(z));
    }
    Ok(design.fit(direction))
}
