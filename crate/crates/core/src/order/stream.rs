use crate::error::{invalid, Result};
use crate::strategy::{floor_mix, Lagged, ResidueBet};
use crate::uniform::check_unit;

use super::bernstein::{BernsteinDesign, BERNSTEIN_DEGREE};
use super::density::{Direction, MonotoneDensity};
use super::grenander::fit_sorted;

const WARMUP: usize = 10;
/// Largest lattice denominator recognized by [`Discreteness::Auto`].
const MAX_LATTICE: usize = 100;
const LATTICE_TOL: f64 = 1e-9;

/// Monotone density estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Grenander,
    Bernstein { degree: usize },
}

impl Estimator {
    pub fn bernstein() -> Self {
        Estimator::Bernstein { degree: BERNSTEIN_DEGREE }
    }
}

/// How smooth fits are adapted to discretely supported data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Discreteness {
    /// Never discretize.
    Continuous,
    /// Average the fit over the cells of the grid `0, 1/L, ..., (L-1)/L`
    /// whenever all past values lie on it, for the smallest such `L <= 100`.
    Auto,
    /// Always average over the grid with this denominator.
    Lattice(usize),
}

fn detect_lattice(values: impl Iterator<Item = f64> + Clone) -> Option<usize> {
    (1..=MAX_LATTICE).find(|&l| {
        let lf = l as f64;
        values.clone().all(|v| ((v * lf) - (v * lf).round()).abs() <= LATTICE_TOL)
    })
}

fn lattice_support(l: usize) -> Vec<f64> {
    (0..l).map(|i| i as f64 / l as f64).collect()
}

#[derive(Debug, Clone)]
enum Sample {
    Sorted(Vec<f64>),
    Bernstein(BernsteinDesign),
}

/// Per-residue bet `1/t + (1 - 1/t) f(z)` with `f` a monotone fit on the
/// residue's past values.
#[derive(Debug, Clone)]
pub struct StochOrderBet {
    direction: Direction,
    discreteness: Discreteness,
    warmup: usize,
    sample: Sample,
    fit: Option<MonotoneDensity>,
}

impl StochOrderBet {
    pub fn new(direction: Direction, estimator: Estimator) -> Self {
        let sample = match estimator {
            Estimator::Grenander => Sample::Sorted(Vec::new()),
            Estimator::Bernstein { degree } => Sample::Bernstein(BernsteinDesign::new(degree.max(1))),
        };
        Self { direction, discreteness: Discreteness::Auto, warmup: WARMUP, sample, fit: None }
    }

    pub fn with_warmup(mut self, warmup: usize) -> Self {
        self.warmup = warmup.max(1);
        self
    }

    pub fn with_discreteness(mut self, discreteness: Discreteness) -> Self {
        self.discreteness = discreteness;
        self
    }

    pub fn len(&self) -> usize {
        match &self.sample {
            Sample::Sorted(v) => v.len(),
            Sample::Bernstein(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fit on the values absorbed so far.
    pub fn current_fit(&mut self) -> MonotoneDensity {
        if let Some(f) = &self.fit {
            return f.clone();
        }
        let f = if self.is_empty() {
            MonotoneDensity::uniform(self.direction)
        } else {
            match &mut self.sample {
                Sample::Sorted(v) => fit_sorted(v, self.direction),
                Sample::Bernstein(design) => {
                    let f = design.fit(self.direction);
                    let lattice = match self.discreteness {
                        Discreteness::Continuous => None,
                        Discreteness::Lattice(l) => Some(l.max(1)),
                        Discreteness::Auto => detect_lattice(design.sorted_values()),
                    };
                    match lattice {
                        Some(l) => f.discretize_fit(&lattice_support(l)),
                        None => f,
                    }
                }
            }
        };
        self.fit = Some(f.clone());
        f
    }

    fn absorb(&mut self, z: f64) {
        let u = self.direction.to_fit(z);
        match &mut self.sample {
            Sample::Sorted(v) => {
                let pos = v.partition_point(|&x| x <= u);
                v.insert(pos, u);
            }
            Sample::Bernstein(d) => d.push(u),
        }
        self.fit = None;
    }
}

impl ResidueBet for StochOrderBet {
    type Obs = f64;

    fn bet(&mut self, t: usize, z: f64) -> f64 {
        let e = if self.len() < self.warmup { 1.0 } else { floor_mix(t, self.current_fit().eval(z)) };
        self.absorb(z);
        e
    }
}

/// Intersection bet for quantile calibration: the mean of an increasing bet
/// on `z_u` and a decreasing bet on `z_l`.
#[derive(Debug, Clone)]
pub struct QuantilePairBet {
    pub upper: StochOrderBet,
    pub lower: StochOrderBet,
}

impl QuantilePairBet {
    pub fn new(estimator: Estimator) -> Self {
        Self {
            upper: StochOrderBet::new(Direction::Increasing, estimator),
            lower: StochOrderBet::new(Direction::Decreasing, estimator),
        }
    }

    pub fn with_warmup(self, warmup: usize) -> Self {
        Self { upper: self.upper.with_warmup(warmup), lower: self.lower.with_warmup(warmup) }
    }
}

impl ResidueBet for QuantilePairBet {
    type Obs = (f64, f64);

    fn bet(&mut self, t: usize, (zu, zl): (f64, f64)) -> f64 {
        0.5 * (self.upper.bet(t, zu) + self.lower.bet(t, zl))
    }
}

/// E-values against "stochastically smaller than uniform" (`Increasing`) or
/// its mirror "stochastically larger" (`Decreasing`) at lag `h`.
pub fn stoch_order_betting_stream(
    zs: &[f64],
    lag: usize,
    direction: Direction,
    estimator: Estimator,
) -> Result<Vec<f64>> {
    check_unit(zs)?;
    Ok(Lagged::new(lag, || StochOrderBet::new(direction, estimator))?.run(zs.iter().copied()))
}

/// Quantile-calibration e-values from `(z_u, z_l)` pairs at lag `h`.
pub fn quantile_calibration_stream(
    pairs: &[(f64, f64)],
    lag: usize,
    estimator: Estimator,
) -> Result<Vec<f64>> {
    for (i, &(zu, zl)) in pairs.iter().enumerate() {
        if !(0.0..=1.0).contains(&zu) || !(0.0..=1.0).contains(&zl) || zu > zl {
            return invalid(format!("pair {} = ({zu}, {zl}) must satisfy 0 <= z_u <= z_l <= 1", i + 1));
        }
    }
    Ok(Lagged::new(lag, || QuantilePairBet::new(estimator))?.run(pairs.iter().copied()))
}
