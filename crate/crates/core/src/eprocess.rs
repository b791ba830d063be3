//! Lagged e-process algebra.
//!
//! Conditional e-values `E_t` are split into `h` residue classes
//! `I_k(T) = {k + h s : s >= 0, k + h s <= T}`. The merged value is the
//! average of the per-class running products,
//!
//! ```text
//!     e_T = (1/h) * sum_k prod_{l in I_k(T)} E_l
//! ```
//!
//! which is an e-value at every fixed `T`, and for `h = 1` the cumulative
//! product is a test supermartingale. For `h >= 2` an anytime-valid threshold
//! rule uses the sum of per-class running suprema scaled by `1 / (h e ln h)`.
//!
//! All products are accumulated in the log domain.

use crate::error::{invalid, Error, Result};
use crate::special::log_sum_exp;

/// One emitted record of an [`EProcess`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub evalue: f64,
    pub e: f64,
    pub running_max: f64,
    pub p: f64,
    /// Scaled sum-of-suprema statistic; `None` for `h = 1`.
    pub tau_h_statistic: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EProcess {
    lag: usize,
    log_evalues: Vec<f64>,
    log_products: Vec<f64>,
    log_suprema: Vec<f64>,
    log_e: Vec<f64>,
    log_running_max: f64,
    log_max_series: Vec<f64>,
    log_tau_stat: Vec<f64>,
}

impl EProcess {
    pub fn new(lag: usize) -> Result<Self> {
        if lag == 0 {
            return invalid("lag must be a positive integer");
        }
        Ok(Self {
            lag,
            log_evalues: Vec::new(),
            log_products: vec![0.0; lag],
            log_suprema: vec![0.0; lag],
            log_e: Vec::new(),
            log_running_max: f64::NEG_INFINITY,
            log_max_series: Vec::new(),
            log_tau_stat: Vec::new(),
        })
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    /// Number of pushed e-values.
    pub fn len(&self) -> usize {
        self.log_evalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_evalues.is_empty()
    }

    /// Appends the next conditional e-value and returns the updated record.
    pub fn push(&mut self, evalue: f64) -> Result<StepRecord> {
        if !(evalue >= 0.0) || !evalue.is_finite() {
            return invalid(format!("e-value must be finite and non-negative, got {evalue}"));
        }
        let t = self.log_evalues.len() + 1;
        let k = (t - 1) % self.lag;
        let le = evalue.ln();
        self.log_evalues.push(le);
        self.log_products[k] += le;
        if self.log_products[k] > self.log_suprema[k] {
            self.log_suprema[k] = self.log_products[k];
        }
        let log_e = if self.lag == 1 {
            self.log_products[0]
        } else {
            log_sum_exp(&self.log_products) - (self.lag as f64).ln()
        };
        self.log_e.push(log_e);
        if log_e > self.log_running_max {
            self.log_running_max = log_e;
        }
        self.log_max_series.push(self.log_running_max);
        if self.lag >= 2 {
            let h = self.lag as f64;
            let scale = (h * std::f64::consts::E * h.ln()).ln();
            self.log_tau_stat.push(log_sum_exp(&self.log_suprema) - scale);
        }
        Ok(self.record(t))
    }

    /// Record for step `t` (1-based).
    pub fn record(&self, t: usize) -> StepRecord {
        assert!(t >= 1 && t <= self.len(), "step {t} out of range");
        let running_max = self.log_max_series[t - 1].exp();
        StepRecord {
            t,
            evalue: self.log_evalues[t - 1].exp(),
            e: self.log_e[t - 1].exp(),
            running_max,
            p: (1.0 / running_max).min(1.0),
            tau_h_statistic: self.log_tau_stat.get(t - 1).map(|x| x.exp()),
        }
    }

    /// All records so far.
    pub fn records(&self) -> Vec<StepRecord> {
        (1..=self.len()).map(|t| self.record(t)).collect()
    }

    /// Current merged value `e_t` (1 before any push).
    pub fn current(&self) -> f64 {
        self.log_e.last().map_or(1.0, |x| x.exp())
    }

    pub fn log_current(&self) -> f64 {
        self.log_e.last().copied().unwrap_or(0.0)
    }

    /// `max_{s <= t} e_s`, or 0 before any push.
    pub fn running_max(&self) -> f64 {
        self.log_running_max.exp()
    }

    /// Anytime-valid p-value `min(1, 1 / max_{s <= t} e_s)`.
    pub fn anytime_p(&self) -> f64 {
        if self.is_empty() {
            return 1.0;
        }
        (1.0 / self.running_max()).min(1.0)
    }

    /// Current value of the `tau_{alpha,h}` statistic; `None` for `h = 1`.
    pub fn tau_h_statistic(&self) -> Option<f64> {
        if self.lag < 2 {
            return None;
        }
        let h = self.lag as f64;
        let scale = (h * std::f64::consts::E * h.ln()).ln();
        Some(
            self.log_tau_stat
                .last()
                .copied()
                .unwrap_or_else(|| log_sum_exp(&self.log_suprema) - scale)
                .exp(),
        )
    }

    /// The `tau_{alpha,h}` statistic per step.
    pub fn tau_h_series(&self) -> Vec<f64> {
        self.log_tau_stat.iter().map(|x| x.exp()).collect()
    }

    /// First `t` with `e_t >= 1/alpha`.
    pub fn stop_tau_alpha(&self, alpha: f64) -> Result<Option<usize>> {
        check_alpha(alpha)?;
        let threshold = 1.0 / alpha;
        Ok(self.log_e.iter().position(|le| le.exp() >= threshold).map(|i| i + 1))
    }

    /// First `t` at which the scaled sum of per-class suprema reaches `1/alpha`.
    pub fn stop_tau_alpha_h(&self, alpha: f64) -> Result<Option<usize>> {
        if self.lag < 2 {
            return Err(Error::Contract(
                "the lag-h stopping rule needs h >= 2; use stop_tau_alpha for h = 1".into(),
            ));
        }
        check_alpha(alpha)?;
        let threshold = 1.0 / alpha;
        Ok(self.log_tau_stat.iter().position(|ls| ls.exp() >= threshold).map(|i| i + 1))
    }

    /// Whether the level-`alpha` threshold rule for this lag has fired.
    pub fn rejects(&self, alpha: f64) -> bool {
        let threshold = -alpha.ln();
        if self.lag == 1 {
            self.log_running_max >= threshold
        } else {
            self.log_tau_stat.last().is_some_and(|&s| s >= threshold)
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}
