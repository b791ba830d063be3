//! Sequential e-values for the discrete uniform null `UNIF({1, ..., m})`.
//!
//! Two strategies: the beta-binomial pmf at its running maximum-likelihood
//! fit, and Laplace-smoothed empirical frequencies.

use crate::error::{invalid, Result};
use crate::special::ln_beta;
use crate::strategy::{Lagged, ResidueBet};
use crate::uniform::{PARAM_MAX, PARAM_MIN};

const BETABINOMIAL_WARMUP: usize = 20;
const EMPIRICAL_WARMUP: usize = 10;
const MAX_ITER: usize = 20;
const STEP_TOL: f64 = 1e-7;

/// Beta-binomial pmf on `{1, ..., m}`:
/// `C(m-1, r-1) B(a + r - 1, b + m - r) / B(a, b)`.
pub fn betabinomial_pmf(r: usize, m: usize, alpha: f64, beta: f64) -> Result<f64> {
    if m == 0 || r == 0 || r > m {
        return invalid(format!("category {r} outside 1..={m}"));
    }
    if !(alpha > 0.0 && beta > 0.0) {
        return invalid(format!("parameters must be positive, got ({alpha}, {beta})"));
    }
    Ok(pmf(r, m, alpha, beta))
}

/// Categories up to which the pmf is evaluated as a product of ratios.
const PRODUCT_FORM_MAX: usize = 500;

fn pmf(r: usize, m: usize, alpha: f64, beta: f64) -> f64 {
    let (n, x) = (m - 1, r - 1);
    if m <= PRODUCT_FORM_MAX {
        // C(n, x) prod_{i<x} (a+i)/(a+b+i) prod_{j<n-x} (b+j)/(a+b+x+j): all
        // factors are O(1), so this keeps full precision without overflow.
        let mut p = 1.0;
        for i in 0..x {
            p *= (alpha + i as f64) / (alpha + beta + i as f64) * (n - i) as f64 / (i + 1) as f64;
        }
        for j in 0..n - x {
            p *= (beta + j as f64) / (alpha + beta + (x + j) as f64);
        }
        if p > 1e-300 {
            return p;
        }
    }
    let (nf, xf) = (n as f64, x as f64);
    (ln_choose(nf, xf) + ln_beta(alpha + xf, beta + nf - xf) - ln_beta(alpha, beta)).exp()
}

/// `ln C(n, x)`.
fn ln_choose(n: f64, x: f64) -> f64 {
    use crate::special::ln_gamma;
    ln_gamma(n + 1.0) - ln_gamma(x + 1.0) - ln_gamma(n - x + 1.0)
}

/// Fitted beta-binomial parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBinomialFit {
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    /// False when Newton broke down and the neutral `(1, 1)` was returned.
    pub converged: bool,
}

impl BetaBinomialFit {
    const NEUTRAL: Self = Self { alpha: 1.0, beta: 1.0, iterations: 0, converged: false };
}

/// Log-likelihood pieces evaluated by recurrence over the trial count.
struct Likelihood<'a> {
    counts: &'a [f64],
    total: f64,
    trials: usize,
}

struct Derivs {
    ll: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
}

impl Likelihood<'_> {
    fn eval(&self, alpha: f64, beta: f64, with_derivs: bool) -> Derivs {
        let n = self.trials;
        // prefix[x] = sum_{i < x} of the respective term
        let mut la = vec![0.0; n + 1];
        let mut lb = vec![0.0; n + 1];
        let mut a1 = vec![0.0; n + 1];
        let mut b1 = vec![0.0; n + 1];
        let mut a2 = vec![0.0; n + 1];
        let mut b2 = vec![0.0; n + 1];
        let s = alpha + beta;
        let (mut ls, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let (ai, bi, si) = (alpha + i as f64, beta + i as f64, s + i as f64);
            la[i + 1] = la[i] + ai.ln();
            lb[i + 1] = lb[i] + bi.ln();
            ls += si.ln();
            if with_derivs {
                a1[i + 1] = a1[i] + 1.0 / ai;
                b1[i + 1] = b1[i] + 1.0 / bi;
                a2[i + 1] = a2[i] + 1.0 / (ai * ai);
                b2[i + 1] = b2[i] + 1.0 / (bi * bi);
                s1 += 1.0 / si;
                s2 += 1.0 / (si * si);
            }
        }
        let mut ll = -self.total * ls;
        let (mut ga, mut gb, mut haa, mut hbb) = (0.0, 0.0, 0.0, 0.0);
        for (x, &c) in self.counts.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let y = n - x;
            ll += c * (la[x] + lb[y]);
            if with_derivs {
                ga += c * a1[x];
                gb += c * b1[y];
                haa -= c * a2[x];
                hbb -= c * b2[y];
            }
        }
        let t = self.total;
        Derivs {
            ll,
            grad: [ga - t * s1, gb - t * s1],
            hess: [[haa + t * s2, t * s2], [t * s2, hbb + t * s2]],
        }
    }

    fn moment_start(&self) -> (f64, f64) {
        let n = self.trials as f64;
        let t = self.total;
        let mean = self.counts.iter().enumerate().map(|(x, c)| x as f64 * c).sum::<f64>() / t;
        let var = self
            .counts
            .iter()
            .enumerate()
            .map(|(x, c)| (x as f64 - mean).powi(2) * c)
            .sum::<f64>()
            / t;
        let p = mean / n;
        let rho = (var / (n * p * (1.0 - p)) - 1.0) / (n - 1.0);
        let s = 1.0 / rho - 1.0;
        let (a, b) = (p * s, (1.0 - p) * s);
        if a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 {
            (a.clamp(PARAM_MIN, PARAM_MAX), b.clamp(PARAM_MIN, PARAM_MAX))
        } else {
            (1.0, 1.0)
        }
    }
}

/// Newton maximum-likelihood fit from per-category counts (`counts[r - 1]`).
pub fn fit_betabinomial_mle(counts: &[usize]) -> Result<BetaBinomialFit> {
    if counts.len() < 2 {
        return invalid("beta-binomial fit needs at least 2 categories");
    }
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    Ok(fit_counts(&as_f64))
}

fn fit_counts(counts: &[f64]) -> BetaBinomialFit {
    let total: f64 = counts.iter().sum();
    if total < 2.0 {
        return BetaBinomialFit::NEUTRAL;
    }
    let lik = Likelihood { counts, total, trials: counts.len() - 1 };
    let (mut a, mut b) = lik.moment_start();
    let mut iterations = 0;
    let mut converged = false;
    let mut current = lik.eval(a, b, true);
    while iterations < MAX_ITER {
        iterations += 1;
        let Derivs { ll, grad, hess } = &current;
        let [[haa, hab], [_, hbb]] = *hess;
        // Shift the Hessian until it is negative definite.
        let mut shift = 0.0;
        let tr = haa + hbb;
        let det = haa * hbb - hab * hab;
        if !(haa < 0.0 && det > 0.0) {
            let disc = ((haa - hbb).powi(2) / 4.0 + hab * hab).sqrt();
            shift = tr / 2.0 + disc + 1e-6 * (1.0 + tr.abs());
        }
        let (haa, hbb) = (haa - shift, hbb - shift);
        let det = haa * hbb - hab * hab;
        if !det.is_finite() || det == 0.0 {
            return BetaBinomialFit::NEUTRAL;
        }
        let mut da = -(hbb * grad[0] - hab * grad[1]) / det;
        let mut db = -(haa * grad[1] - hab * grad[0]) / det;
        if !da.is_finite() || !db.is_finite() {
            return BetaBinomialFit::NEUTRAL;
        }
        let mut next = None;
        for _ in 0..30 {
            let (na, nb) = ((a + da).clamp(PARAM_MIN, PARAM_MAX), (b + db).clamp(PARAM_MIN, PARAM_MAX));
            let cand = lik.eval(na, nb, false);
            if cand.ll >= *ll {
                next = Some((na, nb));
                break;
            }
            da *= 0.5;
            db *= 0.5;
        }
        let Some((na, nb)) = next else {
            converged = true;
            break;
        };
        let moved = (na - a).abs() + (nb - b).abs();
        a = na;
        b = nb;
        if moved <= STEP_TOL {
            converged = true;
            break;
        }
        current = lik.eval(a, b, true);
    }
    if !a.is_finite() || !b.is_finite() {
        return BetaBinomialFit::NEUTRAL;
    }
    BetaBinomialFit { alpha: a, beta: b, iterations, converged: converged || iterations == MAX_ITER }
}

fn check_ranks(rs: &[usize], m: usize) -> Result<()> {
    if m == 0 {
        return invalid("number of categories must be positive");
    }
    if let Some(r) = rs.iter().find(|&&r| r == 0 || r > m) {
        return invalid(format!("category {r} outside 1..={m}"));
    }
    Ok(())
}

/// Per-residue state of the beta-binomial strategy.
#[derive(Debug, Clone)]
pub struct BetaBinomialBet {
    categories: usize,
    warmup: usize,
    counts: Vec<f64>,
    consumed: usize,
    fit: Option<BetaBinomialFit>,
}

impl BetaBinomialBet {
    pub fn new(categories: usize) -> Self {
        Self::with_warmup(categories, BETABINOMIAL_WARMUP)
    }

    pub fn with_warmup(categories: usize, warmup: usize) -> Self {
        Self { categories, warmup, counts: vec![0.0; categories], consumed: 0, fit: None }
    }

    pub fn current_fit(&mut self) -> BetaBinomialFit {
        *self.fit.get_or_insert_with(|| fit_counts(&self.counts))
    }
}

impl ResidueBet for BetaBinomialBet {
    type Obs = usize;

    fn bet(&mut self, _t: usize, r: usize) -> f64 {
        let e = if self.consumed < self.warmup || self.categories < 2 {
            1.0
        } else {
            let f = self.current_fit();
            self.categories as f64 * pmf(r, self.categories, f.alpha, f.beta)
        };
        self.consumed += 1;
        self.counts[r - 1] += 1.0;
        self.fit = None;
        e
    }
}

/// Per-residue state of the smoothed empirical-frequency strategy.
#[derive(Debug, Clone)]
pub struct EmpiricalBet {
    warmup: usize,
    counts: Vec<usize>,
    consumed: usize,
}

impl EmpiricalBet {
    pub fn new(categories: usize) -> Self {
        Self::with_warmup(categories, EMPIRICAL_WARMUP)
    }

    pub fn with_warmup(categories: usize, warmup: usize) -> Self {
        Self { warmup, counts: vec![0; categories], consumed: 0 }
    }

    /// Smoothed weights `(k_j + 1) / (t + m)`.
    pub fn weights(&self) -> Vec<f64> {
        let denom = (self.consumed + self.counts.len()) as f64;
        self.counts.iter().map(|&k| (k + 1) as f64 / denom).collect()
    }
}

impl ResidueBet for EmpiricalBet {
    type Obs = usize;

    fn bet(&mut self, _t: usize, r: usize) -> f64 {
        let m = self.counts.len();
        let e = if self.consumed < self.warmup {
            1.0
        } else {
            m as f64 * (self.counts[r - 1] + 1) as f64 / (self.consumed + m) as f64
        };
        self.consumed += 1;
        self.counts[r - 1] += 1;
        e
    }
}

/// Beta-binomial e-values for ranks in `1..=m` at lag `h`.
pub fn betabinomial_betting_stream(rs: &[usize], m: usize, lag: usize) -> Result<Vec<f64>> {
    check_ranks(rs, m)?;
    Ok(Lagged::new(lag, || BetaBinomialBet::new(m))?.run(rs.iter().copied()))
}

/// Empirical-frequency e-values for ranks in `1..=m` at lag `h`.
pub fn empirical_betting_stream(rs: &[usize], m: usize, lag: usize) -> Result<Vec<f64>> {
    check_ranks(rs, m)?;
    Ok(Lagged::new(lag, || EmpiricalBet::new(m))?.run(rs.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pmf_examples() {
        for r in 1..=21 {
            assert!((betabinomial_pmf(r, 21, 1.0, 1.0).unwrap() - 1.0 / 21.0).abs() < 1e-13);
        }
        assert!((betabinomial_pmf(1, 2, 2.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((betabinomial_pmf(2, 2, 2.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!(betabinomial_pmf(0, 3, 1.0, 1.0).is_err());
        assert!(betabinomial_pmf(4, 3, 1.0, 1.0).is_err());
        assert!(betabinomial_pmf(1, 3, 0.0, 1.0).is_err());
    }

    /// Direct oracle: C(n,x) B(a+x, b+n-x)/B(a,b) = C(n,x) prod ratios.
    #[test]
    fn pmf_matches_product_form() {
        let (a, b, m) = (2.5, 0.7, 6usize);
        let n = m - 1;
        for r in 1..=m {
            let x = r - 1;
            let mut p = 1.0;
            for i in 0..x {
                p *= (a + i as f64) / (a + b + i as f64);
            }
            for j in 0..(n - x) {
                p *= (b + j as f64) / (a + b + (x + j) as f64);
            }
            let choose = (0..x).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
            let direct = choose * p;
            assert!((betabinomial_pmf(r, m, a, b).unwrap() - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn empirical_examples() {
        let mut bet = EmpiricalBet::with_warmup(2, 0);
        assert_eq!(bet.weights(), vec![0.5, 0.5]);
        assert_eq!(bet.bet(1, 1), 1.0);
        for r in [1, 1, 2] {
            bet.bet(2, r);
        }
        // counts (3, 1) after four observations
        assert!((bet.bet(5, 1) - 4.0 / 3.0).abs() < 1e-15);
        let w: f64 = bet.weights().iter().sum();
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn betabinomial_fitted_prediction() {
        let mut bet = BetaBinomialBet::with_warmup(2, 0);
        bet.fit = Some(BetaBinomialFit { alpha: 2.0, beta: 1.0, iterations: 0, converged: true });
        assert!((bet.bet(1, 2) - 4.0 / 3.0).abs() < 1e-13);
        let mut bet = BetaBinomialBet::with_warmup(21, 0);
        bet.fit = Some(BetaBinomialFit { alpha: 1.0, beta: 1.0, iterations: 0, converged: true });
        assert!((bet.bet(1, 7) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn streams_warm_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rs: Vec<usize> = (0..60).map(|_| rng.random_range(1..=21)).collect();
        let bb = betabinomial_betting_stream(&rs, 21, 1).unwrap();
        assert!(bb[..20].iter().all(|&e| e == 1.0));
        let emp = empirical_betting_stream(&rs, 21, 1).unwrap();
        assert!(emp[..10].iter().all(|&e| e == 1.0));
        let emp2 = empirical_betting_stream(&rs, 21, 2).unwrap();
        assert!(emp2[..20].iter().all(|&e| e == 1.0));
        assert!(betabinomial_betting_stream(&[22], 21, 1).is_err());
    }

    #[test]
    fn mle_recovers_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let beta = rand_distr::Beta::new(3.0, 1.5).unwrap();
        let m = 21;
        let mut counts = vec![0usize; m];
        for _ in 0..4000 {
            let p: f64 = rand_distr::Distribution::sample(&beta, &mut rng);
            let x = (0..m - 1).filter(|_| rng.random::<f64>() < p).count();
            counts[x] += 1;
        }
        let fit = fit_betabinomial_mle(&counts).unwrap();
        assert!((fit.alpha - 3.0).abs() < 0.4 && (fit.beta - 1.5).abs() < 0.25, "{fit:?}");
    }

    #[test]
    fn uniform_counts_fit_near_one_one() {
        let counts = vec![100usize; 11];
        let fit = fit_betabinomial_mle(&counts).unwrap();
        // discrete uniform is exactly BB(1, 1)
        assert!((fit.alpha - 1.0).abs() < 1e-4 && (fit.beta - 1.0).abs() < 1e-4, "{fit:?}");
    }
}
