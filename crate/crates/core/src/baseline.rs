//! Fixed-sample comparators: Kolmogorov-Smirnov, chi-square, Bonferroni.
//!
//! Null distributions are asymptotic throughout.

use crate::error::{invalid, Error, Result};
use crate::special::chi_square_sf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// Side of a one-sided KS test, named after the alternative as in R.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KsSide {
    /// `D+ = sup (F_n(x) - x)`: sensitive to samples that are too small.
    Greater,
    /// `D- = sup (x - F_n(x))`: sensitive to samples that are too large.
    Less,
}

fn sorted_unit(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("KS test needs at least one value".into()));
    }
    if let Some(x) = sample.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return invalid(format!("value {x} outside [0, 1]"));
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

fn d_plus(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().map(|(i, x)| (i + 1) as f64 / n - x).fold(0.0, f64::max)
}

fn d_minus(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    sorted.iter().enumerate().map(|(i, x)| x - i as f64 / n).fold(0.0, f64::max)
}

/// `P(K > lambda)` for the Kolmogorov distribution, by the alternating series
/// `2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        // The series converges slowly here and the tail is 1 to double precision.
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sided KS test of uniformity on `[0, 1]`.
pub fn ks_two_sided(sample: &[f64]) -> Result<TestResult> {
    let s = sorted_unit(sample)?;
    let d = d_plus(&s).max(d_minus(&s));
    let n = s.len();
    Ok(TestResult { statistic: d, p_value: kolmogorov_sf((n as f64).sqrt() * d), n })
}

/// One-sided KS test with p-value `exp(-2 n D^2)`.
pub fn ks_one_sided(sample: &[f64], side: KsSide) -> Result<TestResult> {
    let s = sorted_unit(sample)?;
    let d = match side {
        KsSide::Greater => d_plus(&s),
        KsSide::Less => d_minus(&s),
    };
    let n = s.len();
    Ok(TestResult { statistic: d, p_value: (-2.0 * n as f64 * d * d).exp().min(1.0), n })
}

/// Pearson chi-square test of equal cell probabilities.
pub fn chisquare_uniform(counts: &[usize]) -> Result<TestResult> {
    let m = counts.len();
    let n: usize = counts.iter().sum();
    if m < 2 {
        return invalid("chi-square test needs at least two categories");
    }
    if n == 0 {
        return Err(Error::InsufficientData("all counts are zero".into()));
    }
    let expected = n as f64 / m as f64;
    let statistic: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    Ok(TestResult { statistic, p_value: chi_square_sf(statistic, (m - 1) as f64), n })
}

/// Tabulates ranks in `1..=m`.
pub fn rank_counts(ranks: &[usize], m: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0; m];
    for &r in ranks {
        if r == 0 || r > m {
            return invalid(format!("rank {r} outside 1..={m}"));
        }
        counts[r - 1] += 1;
    }
    Ok(counts)
}

/// Bonferroni combination of two p-values.
pub fn bonferroni_pair(p1: f64, p2: f64) -> f64 {
    (2.0 * p1.min(p2)).min(1.0)
}
