//! Run configuration shared by the command line and the simulation harness.

use std::fmt;
use std::str::FromStr;

use crate::baseline::{
    bonferroni_pair, chisquare_uniform, ks_one_sided, ks_two_sided, rank_counts, KsSide, TestResult,
};
use crate::discrete::{BetaBinomialBet, EmpiricalBet};
use crate::error::{Error, Result};
use crate::order::{Direction, Estimator, QuantilePairBet, StochOrderBet};
use crate::strategy::Lagged;
use crate::transforms::CalibrationValue;
use crate::uniform::{BetaBet, KernelBet};

/// Rank categories used when `duf` is given without a count.
pub const DEFAULT_CATEGORIES: usize = 21;
/// Quantile count used when `quantile` is given without a count.
pub const DEFAULT_QUANTILES: usize = 19;

/// E-value betting strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Beta,
    Kernel,
    BetaBinomial,
    Empirical,
    Grenander,
    Bernstein,
    /// Quantile-pair intersection e-value with the Grenander estimator.
    QuantilePair,
}

/// Fixed-sample comparator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Ks,
    KsOneSided,
    ChiSquare,
    KsBonferroni,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    EValue(Method),
    Baseline(Baseline),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// Continuous uniform PIT.
    Cuf,
    /// Discrete uniform ranks on `1..=categories`.
    Duf { categories: usize },
    /// PIT stochastically smaller than uniform.
    St,
    /// PIT stochastically larger than uniform.
    StMirror,
    /// Quantile calibration of `quantiles` equispaced levels.
    Quantile { quantiles: usize },
}

impl TestKind {
    pub fn name(&self) -> &'static str {
        match self {
            TestKind::EValue(m) => match m {
                Method::Beta => "beta",
                Method::Kernel => "kernel",
                Method::BetaBinomial => "betabinomial",
                Method::Empirical => "empirical",
                Method::Grenander => "grenander",
                Method::Bernstein => "bernstein",
                Method::QuantilePair => "quantile-pair",
            },
            TestKind::Baseline(b) => match b {
                Baseline::Ks => "ks",
                Baseline::KsOneSided => "ks-one-sided",
                Baseline::ChiSquare => "chisq",
                Baseline::KsBonferroni => "ks-bonferroni",
            },
        }
    }

    pub fn is_evalue(&self) -> bool {
        matches!(self, TestKind::EValue(_))
    }

    /// Hypothesis assumed when none is given.
    pub fn default_hypothesis(&self) -> Hypothesis {
        use Hypothesis::*;
        match self {
            TestKind::EValue(Method::Beta | Method::Kernel) | TestKind::Baseline(Baseline::Ks) => Cuf,
            TestKind::EValue(Method::BetaBinomial | Method::Empirical)
            | TestKind::Baseline(Baseline::ChiSquare) => Duf { categories: DEFAULT_CATEGORIES },
            TestKind::EValue(Method::Grenander | Method::Bernstein)
            | TestKind::Baseline(Baseline::KsOneSided) => StMirror,
            TestKind::EValue(Method::QuantilePair) | TestKind::Baseline(Baseline::KsBonferroni) => {
                Quantile { quantiles: DEFAULT_QUANTILES }
            }
        }
    }

    fn supports(&self, h: Hypothesis) -> bool {
        use Hypothesis::*;
        match self {
            TestKind::EValue(Method::Beta | Method::Kernel) | TestKind::Baseline(Baseline::Ks) => h == Cuf,
            TestKind::EValue(Method::BetaBinomial | Method::Empirical)
            | TestKind::Baseline(Baseline::ChiSquare) => matches!(h, Duf { .. }),
            TestKind::EValue(Method::Grenander | Method::Bernstein) => {
                matches!(h, St | StMirror | Quantile { .. })
            }
            TestKind::Baseline(Baseline::KsOneSided) => matches!(h, St | StMirror),
            TestKind::EValue(Method::QuantilePair) | TestKind::Baseline(Baseline::KsBonferroni) => {
                matches!(h, Quantile { .. })
            }
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "beta" => TestKind::EValue(Method::Beta),
            "kernel" => TestKind::EValue(Method::Kernel),
            "betabinomial" => TestKind::EValue(Method::BetaBinomial),
            "empirical" => TestKind::EValue(Method::Empirical),
            "grenander" => TestKind::EValue(Method::Grenander),
            "bernstein" => TestKind::EValue(Method::Bernstein),
            "quantile-pair" => TestKind::EValue(Method::QuantilePair),
            "ks" => TestKind::Baseline(Baseline::Ks),
            "ks-one-sided" => TestKind::Baseline(Baseline::KsOneSided),
            "chisq" => TestKind::Baseline(Baseline::ChiSquare),
            "ks-bonferroni" => TestKind::Baseline(Baseline::KsBonferroni),
            _ => return Err(Error::Config(format!("unknown method '{s}'"))),
        })
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Cuf => f.write_str("cuf"),
            Hypothesis::Duf { categories } => write!(f, "duf:{categories}"),
            Hypothesis::St => f.write_str("st"),
            Hypothesis::StMirror => f.write_str("st-mirror"),
            Hypothesis::Quantile { quantiles } => write!(f, "quantile:{quantiles}"),
        }
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    /// Accepts `cuf`, `duf[:m]`, `st`, `st-mirror` and `quantile[:K]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let count = |default: usize, min: usize| -> Result<usize> {
            let Some(a) = arg else { return Ok(default) };
            match a.parse::<usize>() {
                Ok(v) if v >= min => Ok(v),
                _ => Err(Error::Config(format!("'{a}' in '{s}' must be an integer >= {min}"))),
            }
        };
        let h = match name {
            "cuf" => Hypothesis::Cuf,
            "duf" => Hypothesis::Duf { categories: count(DEFAULT_CATEGORIES, 2)? },
            "st" => Hypothesis::St,
            "st-mirror" => Hypothesis::StMirror,
            "quantile" => Hypothesis::Quantile { quantiles: count(DEFAULT_QUANTILES, 1)? },
            _ => return Err(Error::Config(format!("unknown hypothesis '{s}'"))),
        };
        if arg.is_some() && !matches!(name, "duf" | "quantile") {
            return Err(Error::Config(format!("hypothesis '{name}' takes no argument")));
        }
        Ok(h)
    }
}

/// A validated test configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub test: TestKind,
    pub hypothesis: Hypothesis,
    pub lag: usize,
    pub alpha: f64,
    /// Overrides every strategy's warmup length.
    pub warmup: Option<usize>,
}

impl RunConfig {
    pub fn new(test: TestKind, hypothesis: Option<Hypothesis>) -> Result<Self> {
        let hypothesis = hypothesis.unwrap_or_else(|| test.default_hypothesis());
        let cfg = Self { test, hypothesis, lag: 1, alpha: 0.05, warmup: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_lag(mut self, lag: usize) -> Result<Self> {
        self.lag = lag;
        self.validate()?;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_warmup(mut self, warmup: Option<usize>) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.test.supports(self.hypothesis) {
            return Err(Error::Config(format!(
                "method '{}' is not compatible with hypothesis '{}'",
                self.test, self.hypothesis
            )));
        }
        if self.lag == 0 {
            return Err(Error::Config("lag must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    /// Label used in result tables, e.g. `beta` or `beta-h2`.
    pub fn label(&self) -> String {
        if self.lag == 1 {
            self.test.name().to_string()
        } else {
            format!("{}-h{}", self.test.name(), self.lag)
        }
    }

    /// Fresh betting state; `Config` error for baseline tests.
    pub fn bettor(&self) -> Result<Bettor> {
        let TestKind::EValue(method) = self.test else {
            return Err(Error::Config(format!("'{}' is not an e-value method", self.test)));
        };
        let h = self.lag;
        let w = self.warmup;
        let direction = match self.hypothesis {
            Hypothesis::St => Direction::Increasing,
            _ => Direction::Decreasing,
        };
        let estimator = match method {
            Method::Bernstein => Estimator::bernstein(),
            _ => Estimator::Grenander,
        };
        let order = |d: Direction| {
            let b = StochOrderBet::new(d, estimator);
            match w {
                Some(w) => b.with_warmup(w),
                None => b,
            }
        };
        Ok(match (method, self.hypothesis) {
            (Method::Beta, _) => Bettor::Beta(Lagged::new(h, || w.map_or_else(BetaBet::default, BetaBet::with_warmup))?),
            (Method::Kernel, _) => {
                Bettor::Kernel(Lagged::new(h, || w.map_or_else(KernelBet::default, KernelBet::with_warmup))?)
            }
            (Method::BetaBinomial, Hypothesis::Duf { categories: m }) => Bettor::BetaBinomial(
                Lagged::new(h, || w.map_or_else(|| BetaBinomialBet::new(m), |w| BetaBinomialBet::with_warmup(m, w)))?,
                m,
            ),
            (Method::Empirical, Hypothesis::Duf { categories: m }) => Bettor::Empirical(
                Lagged::new(h, || w.map_or_else(|| EmpiricalBet::new(m), |w| EmpiricalBet::with_warmup(m, w)))?,
                m,
            ),
            (_, Hypothesis::Quantile { .. }) => Bettor::Quantile(Lagged::new(h, || QuantilePairBet {
                upper: order(Direction::Increasing),
                lower: order(Direction::Decreasing),
            })?),
            (Method::Grenander | Method::Bernstein, _) => Bettor::Order(Lagged::new(h, || order(direction))?),
            _ => unreachable!("validated configuration"),
        })
    }

    /// Fixed-sample test on a complete sample; `Config` error for e-value methods.
    pub fn baseline(&self, values: &[CalibrationValue]) -> Result<TestResult> {
        let TestKind::Baseline(b) = self.test else {
            return Err(Error::Config(format!("'{}' is not a baseline test", self.test)));
        };
        match (b, self.hypothesis) {
            (Baseline::ChiSquare, Hypothesis::Duf { categories }) => {
                let ranks = values.iter().map(|v| rank_of(*v)).collect::<Result<Vec<_>>>()?;
                chisquare_uniform(&rank_counts(&ranks, categories)?)
            }
            (Baseline::KsBonferroni, _) => {
                let (zu, zl): (Vec<f64>, Vec<f64>) =
                    values.iter().map(|v| pair_of(*v)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
                // z_u should not be too large, z_l not too small.
                let upper = ks_one_sided(&zu, KsSide::Less)?;
                let lower = ks_one_sided(&zl, KsSide::Greater)?;
                Ok(TestResult {
                    statistic: upper.statistic.max(lower.statistic),
                    p_value: bonferroni_pair(upper.p_value, lower.p_value),
                    n: upper.n,
                })
            }
            (_, h) => {
                let zs = values.iter().map(|v| pit_of(*v)).collect::<Result<Vec<_>>>()?;
                match (b, h) {
                    (Baseline::KsOneSided, Hypothesis::St) => ks_one_sided(&zs, KsSide::Less),
                    (Baseline::KsOneSided, _) => ks_one_sided(&zs, KsSide::Greater),
                    _ => ks_two_sided(&zs),
                }
            }
        }
    }
}

fn pit_of(v: CalibrationValue) -> Result<f64> {
    match v {
        CalibrationValue::Pit(z) if (0.0..=1.0).contains(&z) => Ok(z),
        other => Err(Error::InvalidInput(format!("expected a PIT value in [0, 1], got {other:?}"))),
    }
}

fn rank_of(v: CalibrationValue) -> Result<usize> {
    match v {
        CalibrationValue::Rank { rank, .. } => Ok(rank),
        other => Err(Error::InvalidInput(format!("expected a rank, got {other:?}"))),
    }
}

fn pair_of(v: CalibrationValue) -> Result<(f64, f64)> {
    match v {
        CalibrationValue::QuantilePit { upper, lower } if 0.0 <= upper && upper <= lower && lower <= 1.0 => {
            Ok((upper, lower))
        }
        other => Err(Error::InvalidInput(format!("expected 0 <= z_u <= z_l <= 1, got {other:?}"))),
    }
}

/// Betting state for any configured e-value method.
#[derive(Debug, Clone)]
pub enum Bettor {
    Beta(Lagged<BetaBet>),
    Kernel(Lagged<KernelBet>),
    BetaBinomial(Lagged<BetaBinomialBet>, usize),
    Empirical(Lagged<EmpiricalBet>, usize),
    Order(Lagged<StochOrderBet>),
    Quantile(Lagged<QuantilePairBet>),
}

impl Bettor {
    /// Next conditional e-value; rejects values of the wrong kind or range.
    pub fn next(&mut self, value: CalibrationValue) -> Result<f64> {
        Ok(match self {
            Bettor::Beta(l) => l.next(pit_of(value)?),
            Bettor::Kernel(l) => l.next(pit_of(value)?),
            Bettor::Order(l) => l.next(pit_of(value)?),
            Bettor::BetaBinomial(l, m) => l.next(checked_rank(value, *m)?),
            Bettor::Empirical(l, m) => l.next(checked_rank(value, *m)?),
            Bettor::Quantile(l) => l.next(pair_of(value)?),
        })
    }
}

fn checked_rank(value: CalibrationValue, m: usize) -> Result<usize> {
    let r = rank_of(value)?;
    if r == 0 || r > m {
        return Err(Error::InvalidInput(format!("rank {r} outside 1..={m}")));
    }
    Ok(r)
}
