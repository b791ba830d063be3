//! Simulation harness for power studies of calibration tests.
//!
//! Observations are `Y ~ N(0, 1)` and forecasts `N(epsilon, 1 + delta)` with
//! `1 + delta` read as a variance. Every replication owns the ChaCha stream
//! `(cell << 32) | rep` of the base seed, so results do not depend on
//! scheduling.

use std::io::{self, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::{Hypothesis, RunConfig};
use crate::eprocess::{EProcess, StepRecord};
use crate::error::{invalid, Result};
use crate::format::fmt12;
use crate::special::{norm_cdf, norm_quantile};
use crate::transforms::{quantile_pit, randomized_rank, CalibrationValue, QuantileForecast};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_516;
/// Header of the power-grid CSV.
pub const CSV_HEADER: &str = "epsilon,delta,test,n,alpha,reps,reject_rate";

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    Pit,
    Ensemble { members: usize },
    /// Quantile forecasts at these levels.
    Quantile { levels: Vec<f64> },
}

impl ScenarioKind {
    /// Data kind a test of `h` consumes.
    pub fn for_hypothesis(h: Hypothesis) -> Self {
        match h {
            Hypothesis::Cuf | Hypothesis::St | Hypothesis::StMirror => ScenarioKind::Pit,
            Hypothesis::Duf { categories } => ScenarioKind::Ensemble { members: categories - 1 },
            Hypothesis::Quantile { quantiles } => {
                ScenarioKind::Quantile { levels: QuantileForecast::equispaced_levels(quantiles) }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub epsilon: f64,
    pub delta: f64,
    pub kind: ScenarioKind,
    pub n: usize,
    pub seed: u64,
    /// ChaCha stream of `seed`.
    pub stream: u64,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws the transformed forecast/observation sequence of a scenario.
pub fn generate(s: &Scenario) -> Result<Vec<CalibrationValue>> {
    if !(s.delta > -1.0) || !s.epsilon.is_finite() || !s.delta.is_finite() {
        return invalid(format!("need finite epsilon and delta > -1, got ({}, {})", s.epsilon, s.delta));
    }
    let sd = (1.0 + s.delta).sqrt();
    let mut rng = rng(s.seed, s.stream);
    let mut out = Vec::with_capacity(s.n);
    match &s.kind {
        ScenarioKind::Pit => {
            for _ in 0..s.n {
                let y: f64 = rng.sample(StandardNormal);
                out.push(CalibrationValue::Pit(norm_cdf((y - s.epsilon) / sd)));
            }
        }
        ScenarioKind::Ensemble { members } => {
            if *members == 0 {
                return invalid("ensemble needs at least one member");
            }
            let mut ens = vec![0.0; *members];
            for _ in 0..s.n {
                let y: f64 = rng.sample(StandardNormal);
                for x in ens.iter_mut() {
                    *x = s.epsilon + sd * rng.sample::<f64, _>(StandardNormal);
                }
                let v: f64 = rng.random();
                let rank = randomized_rank(&ens, y, v)?;
                out.push(CalibrationValue::Rank { rank, members: *members });
            }
        }
        ScenarioKind::Quantile { levels } => {
            let q = levels.iter().map(|&a| s.epsilon + sd * norm_quantile(a)).collect();
            let forecast = QuantileForecast::new(levels.clone(), q)?;
            for _ in 0..s.n {
                let y: f64 = rng.sample(StandardNormal);
                let v: f64 = rng.random();
                let (upper, lower) = quantile_pit(&forecast, y, v)?;
                out.push(CalibrationValue::QuantilePit { upper, lower });
            }
        }
    }
    Ok(out)
}

/// Whether the configured test rejects on `values`.
///
/// E-value tests stop at the first crossing of `1/alpha` by `e_t` (or by the
/// lag-`h` statistic when `h > 1`); baselines use the fixed-sample p-value.
pub fn rejects(cfg: &RunConfig, values: &[CalibrationValue]) -> Result<bool> {
    if !cfg.test.is_evalue() {
        return Ok(cfg.baseline(values)?.rejects(cfg.alpha));
    }
    let mut bettor = cfg.bettor()?;
    let mut process = EProcess::new(cfg.lag)?;
    for &v in values {
        process.push(bettor.next(v)?)?;
        if process.rejects(cfg.alpha) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Full e-process trajectory of an e-value test.
pub fn trajectory(cfg: &RunConfig, values: &[CalibrationValue]) -> Result<Vec<StepRecord>> {
    let mut bettor = cfg.bettor()?;
    let mut process = EProcess::new(cfg.lag)?;
    values.iter().map(|&v| process.push(bettor.next(v)?)).collect()
}

/// Fraction of `reps` replications in which `cfg` rejects; `data(rep)`
/// produces the sample of one replication.
pub fn rejection_rate<F>(cfg: &RunConfig, reps: u64, data: F) -> Result<f64>
where
    F: Fn(u64) -> Result<Vec<CalibrationValue>> + Sync,
{
    if reps == 0 {
        return invalid("reps must be at least 1");
    }
    let hits = (0..reps)
        .into_par_iter()
        .map(|r| rejects(cfg, &data(r)?).map(u64::from))
        .collect::<Result<Vec<u64>>>()?;
    Ok(hits.iter().sum::<u64>() as f64 / reps as f64)
}

/// Bias and dispersion errors `-0.5, -0.4, ..., 0.5`.
pub fn grid_axis() -> Vec<f64> {
    (-5..=5).map(|i| i as f64 / 10.0).collect()
}

/// The 11 x 11 grid of `(epsilon, delta)` cells.
pub fn full_grid() -> Vec<(f64, f64)> {
    let axis = grid_axis();
    axis.iter().flat_map(|&e| axis.iter().map(move |&d| (e, d))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerStudy {
    pub tests: Vec<RunConfig>,
    pub cells: Vec<(f64, f64)>,
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub epsilon: f64,
    pub delta: f64,
    pub test: String,
    pub n: usize,
    pub alpha: f64,
    pub reps: u64,
    pub reject_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerGrid {
    pub rows: Vec<PowerRow>,
}

impl PowerGrid {
    pub fn rate(&self, test: &str, epsilon: f64, delta: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.test == test && r.epsilon == epsilon && r.delta == delta)
            .map(|r| r.reject_rate)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt12(r.epsilon),
                fmt12(r.delta),
                r.test,
                r.n,
                fmt12(r.alpha),
                r.reps,
                fmt12(r.reject_rate)
            )?;
        }
        Ok(())
    }

    /// One line per test with its null-cell rate and most powerful cell.
    pub fn summary(&self) -> Vec<String> {
        let mut tests: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !tests.contains(&r.test.as_str()) {
                tests.push(&r.test);
            }
        }
        tests
            .into_iter()
            .map(|t| {
                let rows: Vec<&PowerRow> = self.rows.iter().filter(|r| r.test == t).collect();
                let null = rows
                    .iter()
                    .find(|r| r.epsilon == 0.0 && r.delta == 0.0)
                    .map_or("n/a".to_string(), |r| fmt12(r.reject_rate));
                let best = rows.iter().max_by(|a, b| a.reject_rate.total_cmp(&b.reject_rate)).expect("rows");
                format!(
                    "{t}: null-cell rate {null}, max power {} at (epsilon, delta) = ({}, {})",
                    fmt12(best.reject_rate),
                    fmt12(best.epsilon),
                    fmt12(best.delta)
                )
            })
            .collect()
    }
}

/// Runs every test in every cell. Tests that consume the same kind of data
/// share the replication's sample.
pub fn run_power_grid(study: &PowerStudy) -> Result<PowerGrid> {
    if study.reps == 0 {
        return invalid("reps must be at least 1");
    }
    if study.n == 0 {
        return invalid("n must be at least 1");
    }
    let kinds: Vec<ScenarioKind> = study.tests.iter().map(|t| ScenarioKind::for_hypothesis(t.hypothesis)).collect();
    let mut rows = Vec::with_capacity(study.cells.len() * study.tests.len());
    for (c, &(epsilon, delta)) in study.cells.iter().enumerate() {
        let hits = (0..study.reps)
            .into_par_iter()
            .map(|r| {
                let stream = ((c as u64) << 32) | r;
                let mut cache: Vec<(&ScenarioKind, Vec<CalibrationValue>)> = Vec::new();
                let mut out = Vec::with_capacity(study.tests.len());
                for (cfg, kind) in study.tests.iter().zip(&kinds) {
                    let idx = match cache.iter().position(|(k, _)| *k == kind) {
                        Some(i) => i,
                        None => {
                            let s = Scenario { epsilon, delta, kind: kind.clone(), n: study.n, seed: study.seed, stream };
                            cache.push((kind, generate(&s)?));
                            cache.len() - 1
                        }
                    };
                    out.push(rejects(cfg, &cache[idx].1)?);
                }
                Ok(out)
            })
            .collect::<Result<Vec<Vec<bool>>>>()?;
        for (i, cfg) in study.tests.iter().enumerate() {
            let count = hits.iter().filter(|h| h[i]).count();
            rows.push(PowerRow {
                epsilon,
                delta,
                test: cfg.label(),
                n: study.n,
                alpha: cfg.alpha,
                reps: study.reps,
                reject_rate: count as f64 / study.reps as f64,
            });
        }
    }
    Ok(PowerGrid { rows })
}

/// PIT values of unfocused forecasts: `Y` is a Gaussian random walk and the
/// forecast for `Y_{t+1}` is the equal mixture of `N(Y_t, 1)` and
/// `N(Y_t + eta_t, 1)` with `eta_t = +-1`.
pub fn unfocused_scenario(n: usize, seed: u64) -> Vec<f64> {
    unfocused_pits(n, seed, 0, 1.0)
}

/// As [`unfocused_scenario`] with stream selection and `eta_t = +-eta`;
/// `eta = 0` is the ideal forecast.
pub fn unfocused_pits(n: usize, seed: u64, stream: u64, eta: f64) -> Vec<f64> {
    let mut rng = rng(seed, stream);
    (0..n)
        .map(|_| {
            let step: f64 = rng.sample(StandardNormal);
            let shift = if rng.random::<bool>() { eta } else { -eta };
            0.5 * (norm_cdf(step) + norm_cdf(step - shift))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::TestKind;

    fn scenario(kind: ScenarioKind, epsilon: f64, n: usize) -> Scenario {
        Scenario { epsilon, delta: 0.0, kind, n, seed: 1, stream: 0 }
    }

    #[test]
    fn generation_is_deterministic() {
        let s = scenario(ScenarioKind::Ensemble { members: 20 }, 0.1, 50);
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        let other = Scenario { stream: 1, ..s.clone() };
        assert_ne!(generate(&s).unwrap(), generate(&other).unwrap());
        assert!(generate(&Scenario { delta: -1.0, ..s }).is_err());
    }

    #[test]
    fn quantile_gap_is_constant() {
        let levels = QuantileForecast::equispaced_levels(19);
        let s = scenario(ScenarioKind::Quantile { levels }, 0.2, 200);
        for v in generate(&s).unwrap() {
            let CalibrationValue::QuantilePit { upper, lower } = v else { panic!() };
            assert!((lower - upper - 0.05).abs() < 1e-15);
        }
    }

    #[test]
    fn positive_bias_shifts_pit_down() {
        let s = scenario(ScenarioKind::Pit, 0.5, 2000);
        let mean: f64 = generate(&s)
            .unwrap()
            .iter()
            .map(|v| match v {
                CalibrationValue::Pit(z) => *z,
                _ => unreachable!(),
            })
            .sum::<f64>()
            / 2000.0;
        assert!(mean < 0.4);
    }

    #[test]
    fn grid_shape_and_csv() {
        assert_eq!(full_grid().len(), 121);
        let tests = vec![
            RunConfig::new("beta".parse::<TestKind>().unwrap(), None).unwrap(),
            RunConfig::new("ks".parse::<TestKind>().unwrap(), None).unwrap(),
        ];
        let study = PowerStudy { tests, cells: vec![(0.0, 0.0), (0.5, 0.0)], n: 60, reps: 3, seed: 9 };
        let grid = run_power_grid(&study).unwrap();
        assert_eq!(grid.rows.len(), 4);
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), 5);
        assert_eq!(grid, run_power_grid(&study).unwrap());
        assert_eq!(grid.summary().len(), 2);
    }

    #[test]
    fn ideal_unfocused_forecast_is_exact_pit() {
        let z = unfocused_pits(10, 3, 0, 0.0);
        assert!(z.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert_eq!(z, unfocused_pits(10, 3, 0, 0.0));
    }
}
