//! Beta-family betting: the next e-value is the beta density at the running
//! maximum-likelihood estimate, fitted by Newton's method.

use crate::error::{invalid, Error, Result};
use crate::special::{digamma, ln_beta, trigamma};
use crate::strategy::{Lagged, ResidueBet};

use super::{check_unit, is_interior};

pub const PARAM_MIN: f64 = 0.001;
pub const PARAM_MAX: f64 = 100.0;

const WARMUP: usize = 10;
const MAX_ITER: usize = 20;
const LOGLIK_TOL: f64 = 1e-6;

/// Beta density `z^(a-1) (1-z)^(b-1) / B(a, b)`; boundary points return 1.
pub fn beta_evalue(z: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) {
        return invalid(format!("beta parameters must be positive, got ({alpha}, {beta})"));
    }
    if !(0.0..=1.0).contains(&z) {
        return invalid(format!("value {z} outside [0, 1]"));
    }
    Ok(density(z, alpha, beta))
}

fn density(z: f64, alpha: f64, beta: f64) -> f64 {
    if !is_interior(z) {
        return 1.0;
    }
    ((alpha - 1.0) * z.ln() + (beta - 1.0) * (-z).ln_1p() - ln_beta(alpha, beta)).exp()
}

/// Sufficient statistics of interior observations.
#[derive(Debug, Clone, Default)]
pub struct BetaStats {
    n: usize,
    sum_ln: f64,
    sum_ln1m: f64,
    sum: f64,
    sum_sq: f64,
}

impl BetaStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut s = Self::default();
        for &z in samples {
            s.push(z);
        }
        s
    }

    /// Adds `z`; boundary values are ignored.
    pub fn push(&mut self, z: f64) {
        if !is_interior(z) {
            return;
        }
        self.n += 1;
        self.sum_ln += z.ln();
        self.sum_ln1m += (-z).ln_1p();
        self.sum += z;
        self.sum_sq += z * z;
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn log_likelihood(&self, alpha: f64, beta: f64) -> f64 {
        (alpha - 1.0) * self.sum_ln + (beta - 1.0) * self.sum_ln1m
            - self.n as f64 * ln_beta(alpha, beta)
    }

    /// Gradient of the log-likelihood in `(alpha, beta)`.
    pub fn score(&self, alpha: f64, beta: f64) -> [f64; 2] {
        let n = self.n as f64;
        let common = digamma(alpha + beta);
        [
            self.sum_ln - n * (digamma(alpha) - common),
            self.sum_ln1m - n * (digamma(beta) - common),
        ]
    }

    fn moment_start(&self) -> (f64, f64) {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = self.sum_sq / n - mean * mean;
        let common = mean * (1.0 - mean) / var - 1.0;
        let (a, b) = (mean * common, (1.0 - mean) * common);
        if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
            (clamp(a), clamp(b))
        } else {
            (1.0, 1.0)
        }
    }

    /// Newton maximization from the moment-matching start, clamped to
    /// `[PARAM_MIN, PARAM_MAX]`.
    pub fn fit(&self) -> Result<BetaFit> {
        if self.n < 2 {
            return Err(Error::InsufficientData(format!(
                "beta MLE needs at least 2 interior samples, got {}",
                self.n
            )));
        }
        let n = self.n as f64;
        let (mut a, mut b) = self.moment_start();
        let mut ll = self.log_likelihood(a, b);
        let mut iterations = 0;
        while iterations < MAX_ITER {
            iterations += 1;
            let [ga, gb] = self.score(a, b);
            let common = trigamma(a + b);
            // Observed information, n * (Fisher information of one draw).
            let iaa = n * (trigamma(a) - common);
            let ibb = n * (trigamma(b) - common);
            let iab = -n * common;
            let det = iaa * ibb - iab * iab;
            if !(det > 0.0) || !det.is_finite() {
                break;
            }
            let mut da = (ibb * ga - iab * gb) / det;
            let mut db = (iaa * gb - iab * ga) / det;
            let mut accepted = None;
            for _ in 0..30 {
                let (ca, cb) = (clamp(a + da), clamp(b + db));
                let cll = self.log_likelihood(ca, cb);
                if cll >= ll {
                    accepted = Some((ca, cb, cll));
                    break;
                }
                da *= 0.5;
                db *= 0.5;
            }
            let Some((ca, cb, cll)) = accepted else { break };
            let change = cll - ll;
            a = ca;
            b = cb;
            ll = cll;
            if change.abs() <= LOGLIK_TOL {
                break;
            }
        }
        Ok(BetaFit { alpha: a, beta: b, log_likelihood: ll, iterations })
    }
}

fn clamp(x: f64) -> f64 {
    x.clamp(PARAM_MIN, PARAM_MAX)
}

/// Result of [`fit_beta_mle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFit {
    pub alpha: f64,
    pub beta: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
}

impl BetaFit {
    pub fn is_interior(&self) -> bool {
        let inside = |x: f64| x > PARAM_MIN && x < PARAM_MAX;
        inside(self.alpha) && inside(self.beta)
    }
}

/// Beta MLE on the interior points of `samples`.
pub fn fit_beta_mle(samples: &[f64]) -> Result<BetaFit> {
    check_unit(samples)?;
    BetaStats::from_samples(samples).fit()
}

/// Per-residue state of the beta strategy.
#[derive(Debug, Clone)]
pub struct BetaBet {
    warmup: usize,
    consumed: usize,
    stats: BetaStats,
    fit: Option<BetaFit>,
    stale: bool,
}

impl Default for BetaBet {
    fn default() -> Self {
        Self::with_warmup(WARMUP)
    }
}

impl BetaBet {
    pub fn with_warmup(warmup: usize) -> Self {
        Self { warmup: warmup.max(2), consumed: 0, stats: BetaStats::default(), fit: None, stale: false }
    }

    /// Current fit, refreshed lazily.
    pub fn current_fit(&mut self) -> Option<BetaFit> {
        if self.stale {
            self.fit = self.stats.fit().ok();
            self.stale = false;
        }
        self.fit
    }
}

impl ResidueBet for BetaBet {
    type Obs = f64;

    fn bet(&mut self, _t: usize, z: f64) -> f64 {
        let e = if self.consumed < self.warmup || !is_interior(z) {
            1.0
        } else {
            self.current_fit().map_or(1.0, |f| density(z, f.alpha, f.beta))
        };
        self.consumed += 1;
        if is_interior(z) {
            self.stats.push(z);
            self.stale = true;
        }
        e
    }
}

/// Beta-MLE e-values at lag `h`.
pub fn beta_betting_stream(zs: &[f64], lag: usize) -> Result<Vec<f64>> {
    check_unit(zs)?;
    Ok(Lagged::new(lag, BetaBet::default)?.run(zs.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Beta, Distribution};

    #[test]
    fn evalue_examples() {
        assert!((beta_evalue(0.5, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((beta_evalue(0.5, 2.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((beta_evalue(0.25, 2.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(beta_evalue(0.0, 2.0, 3.0).unwrap(), 1.0);
        assert_eq!(beta_evalue(1.0, 2.0, 3.0).unwrap(), 1.0);
        assert!(beta_evalue(0.5, 0.0, 1.0).is_err());
        assert!(beta_evalue(0.5, 1.0, -2.0).is_err());
    }

    #[test]
    fn evalue_stays_finite_over_clamp_box() {
        for &(a, b) in &[(PARAM_MIN, PARAM_MIN), (PARAM_MAX, PARAM_MAX), (PARAM_MIN, PARAM_MAX)] {
            let e = beta_evalue(0.3, a, b).unwrap();
            assert!(e.is_finite() && e >= 0.0);
        }
    }

    /// Sample whose MLE score vanishes exactly at (1, 1):
    /// mean ln z = mean ln(1-z) = psi(1) - psi(2) = -1.
    #[test]
    fn symmetric_uniform_like_sample_fits_one_one() {
        // z and 1 - z pairs with mean log -1: solve ln z + ln(1-z) = -2.
        let z = (1.0 - (1.0f64 - 4.0 * (-2.0f64).exp()).sqrt()) / 2.0;
        let samples = [z, 1.0 - z, z, 1.0 - z];
        let fit = fit_beta_mle(&samples).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-6 && (fit.beta - 1.0).abs() < 1e-6, "{fit:?}");
    }

    /// Independent grid-search maximizer of the same likelihood.
    fn grid_mle(samples: &[f64]) -> (f64, f64) {
        let s1: f64 = samples.iter().map(|z| z.ln()).sum();
        let s2: f64 = samples.iter().map(|z| (1.0 - z).ln()).sum();
        let n = samples.len() as f64;
        let ll = |a: f64, b: f64| {
            (a - 1.0) * s1 + (b - 1.0) * s2
                - n * (statrs::function::gamma::ln_gamma(a) + statrs::function::gamma::ln_gamma(b)
                    - statrs::function::gamma::ln_gamma(a + b))
        };
        let mut best = (1.0, 1.0, f64::NEG_INFINITY);
        for i in 1..=160 {
            for j in 1..=200 {
                let (a, b) = (i as f64 * 0.025, j as f64 * 0.05);
                let v = ll(a, b);
                if v > best.2 {
                    best = (a, b, v);
                }
            }
        }
        (best.0, best.1)
    }

    #[test]
    fn beta_two_five_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dist = Beta::new(2.0, 5.0).unwrap();
        let samples: Vec<f64> = (0..1000).map(|_| dist.sample(&mut rng)).collect();
        let fit = fit_beta_mle(&samples).unwrap();
        let (ga, gb) = grid_mle(&samples);
        assert!((fit.alpha - 2.0).abs() < 0.5 && (fit.beta - 5.0).abs() < 0.8, "{fit:?}");
        assert!((fit.alpha - ga).abs() < 0.03 && (fit.beta - gb).abs() < 0.06, "{fit:?} vs {ga},{gb}");
    }

    #[test]
    fn degenerate_sample_clamps_at_upper_bound() {
        let samples = [0.5; 20];
        let stats = BetaStats::from_samples(&samples);
        // likelihood increases along alpha = beta for a point mass at 1/2
        let mut prev = f64::NEG_INFINITY;
        for k in [1.0, 2.0, 5.0, 20.0, 50.0, 100.0] {
            let ll = stats.log_likelihood(k, k);
            assert!(ll > prev);
            prev = ll;
        }
        let fit = stats.fit().unwrap();
        assert_eq!((fit.alpha, fit.beta), (PARAM_MAX, PARAM_MAX));
    }

    #[test]
    fn too_few_samples_is_insufficient() {
        assert!(matches!(fit_beta_mle(&[0.3]), Err(Error::InsufficientData(_))));
        assert!(matches!(fit_beta_mle(&[0.0, 1.0, 0.4]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn stream_warmup_and_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dist = Beta::new(3.0, 1.0).unwrap();
        let mut zs: Vec<f64> = (0..80).map(|_| dist.sample(&mut rng)).collect();
        zs[49] = 0.0;
        let es = beta_betting_stream(&zs, 1).unwrap();
        assert!(es[..10].iter().all(|&e| e == 1.0));
        assert_eq!(es[49], 1.0);
        assert!(es[10..].iter().any(|&e| e != 1.0));
        let lagged = beta_betting_stream(&zs, 3).unwrap();
        assert!(lagged[..30].iter().all(|&e| e == 1.0));
        assert!(beta_betting_stream(&[0.2, 1.2], 1).is_err());
    }

    #[test]
    fn uniform_fit_gives_unit_evalue() {
        let mut bet = BetaBet::with_warmup(2);
        bet.fit = Some(BetaFit { alpha: 1.0, beta: 1.0, log_likelihood: 0.0, iterations: 0 });
        bet.consumed = 5;
        assert!((bet.bet(6, 0.83) - 1.0).abs() < 1e-14);
    }
}
