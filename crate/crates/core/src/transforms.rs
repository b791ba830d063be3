//! Calibration transforms: PIT, randomized rank and upper/lower quantile PIT.

use crate::error::{invalid, Result};
use crate::special::norm_cdf;

/// A forecast CDF that can be evaluated at `y` and at the left limit `y-`.
#[derive(Debug, Clone, PartialEq)]
pub enum CdfSpec {
    Gaussian { mean: f64, sd: f64 },
    /// Logistic distribution truncated to `[0, inf)`.
    LogisticTruncated { location: f64, scale: f64 },
    /// Logistic distribution censored at zero (point mass `L(0)` at the origin).
    LogisticCensored { location: f64, scale: f64 },
    /// Ensemble ECDF; members are kept sorted.
    Empirical(Vec<f64>),
    /// Defective CDF `F_u` built from quantile forecasts.
    DefectiveUpper(QuantileForecast),
    /// Defective CDF `F_l` built from quantile forecasts.
    DefectiveLower(QuantileForecast),
}

/// Quantile levels `0 < a_1 < ... < a_K < 1` and forecasts `q_1 <= ... <= q_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileForecast {
    levels: Vec<f64>,
    quantiles: Vec<f64>,
}

impl QuantileForecast {
    pub fn new(levels: Vec<f64>, quantiles: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || levels.len() != quantiles.len() {
            return invalid("levels and quantiles must be non-empty and of equal length");
        }
        if levels.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return invalid("quantile levels must lie in (0, 1)");
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("quantile levels must be strictly increasing");
        }
        if quantiles.iter().any(|q| !q.is_finite()) {
            return invalid("quantiles must be finite");
        }
        if quantiles.windows(2).any(|w| w[0] > w[1]) {
            return invalid("quantiles must be non-decreasing");
        }
        Ok(Self { levels, quantiles })
    }

    /// Equispaced levels `i / (K + 1)`, `i = 1..=K`.
    pub fn equispaced_levels(k: usize) -> Vec<f64> {
        (1..=k).map(|i| i as f64 / (k + 1) as f64).collect()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn quantiles(&self) -> &[f64] {
        &self.quantiles
    }

    fn level(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            i if i > self.levels.len() => 1.0,
            i => self.levels[i - 1],
        }
    }

    fn count_le(&self, y: f64) -> usize {
        self.quantiles.partition_point(|&q| q <= y)
    }

    fn count_lt(&self, y: f64) -> usize {
        self.quantiles.partition_point(|&q| q < y)
    }

    /// `F_u(y)`.
    pub fn upper(&self, y: f64) -> f64 {
        self.level(self.count_le(y))
    }

    /// `F_l(y)`.
    pub fn lower(&self, y: f64) -> f64 {
        self.level(self.count_le(y) + 1)
    }
}

impl CdfSpec {
    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0) || !mean.is_finite() || !sd.is_finite() {
            return invalid("gaussian needs finite mean and sd > 0");
        }
        Ok(Self::Gaussian { mean, sd })
    }

    pub fn empirical(mut ensemble: Vec<f64>) -> Result<Self> {
        if ensemble.is_empty() {
            return invalid("empty ensemble");
        }
        if ensemble.iter().any(|x| !x.is_finite()) {
            return invalid("ensemble members must be finite");
        }
        ensemble.sort_by(f64::total_cmp);
        Ok(Self::Empirical(ensemble))
    }

    pub fn logistic_truncated(location: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !location.is_finite() {
            return invalid("logistic needs finite location and scale > 0");
        }
        Ok(Self::LogisticTruncated { location, scale })
    }

    pub fn logistic_censored(location: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !location.is_finite() {
            return invalid("logistic needs finite location and scale > 0");
        }
        Ok(Self::LogisticCensored { location, scale })
    }

    /// `F(y)`.
    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            Self::Gaussian { mean, sd } => norm_cdf((y - mean) / sd),
            Self::LogisticTruncated { location, scale } => {
                if y < 0.0 {
                    0.0
                } else {
                    let l0 = logistic(-location / scale);
                    (logistic((y - location) / scale) - l0) / (1.0 - l0)
                }
            }
            Self::LogisticCensored { location, scale } => {
                if y < 0.0 {
                    0.0
                } else {
                    logistic((y - location) / scale)
                }
            }
            Self::Empirical(xs) => xs.partition_point(|&x| x <= y) as f64 / xs.len() as f64,
            Self::DefectiveUpper(q) => q.upper(y),
            Self::DefectiveLower(q) => q.lower(y),
        }
    }

    /// Left limit `F(y-)`.
    pub fn cdf_left(&self, y: f64) -> f64 {
        match self {
            Self::Gaussian { .. } | Self::LogisticTruncated { .. } => self.cdf(y),
            Self::LogisticCensored { location, scale } => {
                if y <= 0.0 {
                    0.0
                } else {
                    logistic((y - location) / scale)
                }
            }
            Self::Empirical(xs) => xs.partition_point(|&x| x < y) as f64 / xs.len() as f64,
            Self::DefectiveUpper(q) => q.level(q.count_lt(y)),
            Self::DefectiveLower(q) => q.level(q.count_lt(y) + 1),
        }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One transformed observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalibrationValue {
    Pit(f64),
    /// Rank in `1..=m + 1` for an ensemble of size `m`.
    Rank { rank: usize, members: usize },
    /// Upper and lower quantile PIT, `z_u <= z_l`.
    QuantilePit { upper: f64, lower: f64 },
}

fn check_draw(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return invalid(format!("randomization draw {v} outside [0, 1]"));
    }
    Ok(())
}

/// Randomized PIT `F(y-) + v (F(y) - F(y-))`.
pub fn pit(cdf: &CdfSpec, y: f64, v: f64) -> Result<f64> {
    if !y.is_finite() {
        return invalid("observation must be finite");
    }
    check_draw(v)?;
    let left = cdf.cdf_left(y);
    let right = cdf.cdf(y);
    if left == right {
        return Ok(right);
    }
    Ok(left + v * (right - left))
}

/// Randomized rank of `y` within the ensemble `members`, in `1..=m + 1`.
///
/// Ties are broken so that `rank = 1 + floor(m * pit(ecdf, y, v))`.
pub fn randomized_rank(members: &[f64], y: f64, v: f64) -> Result<usize> {
    if members.is_empty() {
        return invalid("empty ensemble");
    }
    if !y.is_finite() || members.iter().any(|x| !x.is_finite()) {
        return invalid("ensemble and observation must be finite");
    }
    check_draw(v)?;
    let below = members.iter().filter(|&&x| x < y).count();
    let ties = members.iter().filter(|&&x| x == y).count();
    let jitter = (v * ties as f64).floor() as usize;
    Ok(1 + below + jitter)
}

/// Upper and lower quantile PIT `(z_u, z_l)` sharing the draw `v`.
pub fn quantile_pit(forecast: &QuantileForecast, y: f64, v: f64) -> Result<(f64, f64)> {
    if !y.is_finite() {
        return invalid("observation must be finite");
    }
    check_draw(v)?;
    let le = forecast.count_le(y);
    let lt = forecast.count_lt(y);
    let upper = v * forecast.level(le) + (1.0 - v) * forecast.level(lt);
    let lower = v * forecast.level(le + 1) + (1.0 - v) * forecast.level(lt + 1);
    Ok((upper, lower))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qf(levels: &[f64], q: &[f64]) -> QuantileForecast {
        QuantileForecast::new(levels.to_vec(), q.to_vec()).unwrap()
    }

    #[test]
    fn pit_examples() {
        let g = CdfSpec::gaussian(0.0, 1.0).unwrap();
        assert_eq!(pit(&g, 0.0, 0.7).unwrap(), 0.5);
        assert!((pit(&g, 1.959964, 0.1).unwrap() - 0.975).abs() < 1e-6);
        let point = CdfSpec::empirical(vec![0.0]).unwrap();
        assert!((pit(&point, 0.0, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!(pit(&g, f64::NAN, 0.5).is_err());
        assert!(pit(&g, 0.0, 1.5).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(randomized_rank(&[1.0, 2.0, 3.0], 2.5, 0.9).unwrap(), 3);
        assert_eq!(randomized_rank(&[1.0, 2.0, 3.0], 4.0, 0.1).unwrap(), 4);
        assert_eq!(randomized_rank(&[2.0, 2.0], 2.0, 0.6).unwrap(), 2);
        assert!(randomized_rank(&[], 1.0, 0.5).is_err());
    }

    #[test]
    fn quantile_pit_examples() {
        let f = qf(&[0.5], &[0.0]);
        assert_eq!(quantile_pit(&f, 1.0, 0.2).unwrap(), (0.5, 1.0));
        assert_eq!(quantile_pit(&f, -1.0, 0.9).unwrap(), (0.0, 0.5));
        assert_eq!(quantile_pit(&f, 0.0, 0.5).unwrap(), (0.25, 0.75));
    }

    #[test]
    fn quantile_forecast_validation() {
        assert!(QuantileForecast::new(vec![0.6, 0.4], vec![0.0, 1.0]).is_err());
        assert!(QuantileForecast::new(vec![0.4, 0.6], vec![1.0, 0.0]).is_err());
        assert!(QuantileForecast::new(vec![0.0, 0.6], vec![0.0, 1.0]).is_err());
        assert!(QuantileForecast::new(vec![0.4], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn censored_logistic_has_atom_at_zero() {
        let f = CdfSpec::logistic_censored(1.0, 0.5).unwrap();
        assert_eq!(f.cdf_left(0.0), 0.0);
        assert!((f.cdf(0.0) - logistic(-2.0)).abs() < 1e-15);
        let z = pit(&f, 0.0, 0.5).unwrap();
        assert!((z - 0.5 * logistic(-2.0)).abs() < 1e-15);
        let t = CdfSpec::logistic_truncated(1.0, 0.5).unwrap();
        assert_eq!(t.cdf(0.0), 0.0);
        assert!((t.cdf(1e6) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn defective_cdfs_bracket_the_exact_cdf() {
        let levels = QuantileForecast::equispaced_levels(9);
        let q: Vec<f64> = levels.iter().map(|&a| crate::special::norm_quantile(a)).collect();
        let f = qf(&levels, &q);
        let g = CdfSpec::gaussian(0.0, 1.0).unwrap();
        for i in -40..=40 {
            let y = i as f64 / 10.0;
            assert!(f.upper(y) <= g.cdf(y) + 1e-12);
            assert!(g.cdf(y) <= f.lower(y) + 1e-12);
        }
    }
}
