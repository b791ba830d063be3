//! Betting strategies and lag-h residue separation.

use crate::error::{invalid, Result};

/// Per-residue betting state.
///
/// `bet` returns the e-value for `obs` from the fit on previously absorbed
/// observations, then absorbs `obs`. `t` is the global (1-based) time index.
pub trait ResidueBet {
    type Obs: Copy;

    fn bet(&mut self, t: usize, obs: Self::Obs) -> f64;
}

/// Runs one independent [`ResidueBet`] per residue class `k = ((t - 1) mod h) + 1`,
/// so the e-value at time `t` only depends on observations up to `t - h`.
#[derive(Debug, Clone)]
pub struct Lagged<S> {
    residues: Vec<S>,
    t: usize,
}

impl<S: ResidueBet> Lagged<S> {
    pub fn new(lag: usize, mut make: impl FnMut() -> S) -> Result<Self> {
        if lag == 0 {
            return invalid("lag must be a positive integer");
        }
        Ok(Self { residues: (0..lag).map(|_| make()).collect(), t: 0 })
    }

    pub fn lag(&self) -> usize {
        self.residues.len()
    }

    /// Number of consumed observations.
    pub fn time(&self) -> usize {
        self.t
    }

    pub fn next(&mut self, obs: S::Obs) -> f64 {
        self.t += 1;
        let k = (self.t - 1) % self.residues.len();
        self.residues[k].bet(self.t, obs)
    }

    pub fn run(&mut self, obs: impl IntoIterator<Item = S::Obs>) -> Vec<f64> {
        obs.into_iter().map(|o| self.next(o)).collect()
    }

    pub fn residues(&self) -> &[S] {
        &self.residues
    }
}

/// Convex mixture `lambda + (1 - lambda) e` with `lambda = 1/t`.
pub(crate) fn floor_mix(t: usize, e: f64) -> f64 {
    let lambda = 1.0 / t as f64;
    lambda + (1.0 - lambda) * e
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Records which observations each residue saw.
    #[derive(Default)]
    struct Spy {
        seen: Vec<usize>,
    }

    impl ResidueBet for Spy {
        type Obs = usize;
        fn bet(&mut self, _t: usize, obs: usize) -> f64 {
            self.seen.push(obs);
            1.0
        }
    }

    #[test]
    fn residues_see_disjoint_subsequences() {
        let mut l = Lagged::new(3, Spy::default).unwrap();
        l.run(1..=8);
        assert_eq!(l.residues()[0].seen, vec![1, 4, 7]);
        assert_eq!(l.residues()[1].seen, vec![2, 5, 8]);
        assert_eq!(l.residues()[2].seen, vec![3, 6]);
        assert!(Lagged::new(0, Spy::default).is_err());
    }

    #[test]
    fn floor_mix_examples() {
        assert!((floor_mix(20, 0.0) - 0.05).abs() < 1e-15);
        assert!((floor_mix(100, 1.5) - 1.495).abs() < 1e-12);
        assert_eq!(floor_mix(1, 7.0), 1.0);
    }
}
