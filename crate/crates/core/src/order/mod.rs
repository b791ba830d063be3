//! E-values for stochastic-order nulls via monotone density estimation.
//!
//! An increasing density `f` on `[0, 1]` satisfies `E f(Z) <= 1` for every
//! `Z` stochastically smaller than uniform; a decreasing one for every `Z`
//! stochastically larger. Monotone fits are therefore valid bets against
//! these composite nulls, and the average of an increasing bet on the upper
//! quantile PIT and a decreasing bet on the lower one tests calibration of
//! quantile forecasts.

mod bernstein;
mod density;
mod grenander;
pub mod qp;
mod stream;

pub use bernstein::{bernstein_fit, BERNSTEIN_DEGREE};
pub use density::{discretize_density, Direction, MonotoneDensity};
pub use grenander::grenander_fit;
pub use stream::{
    quantile_calibration_stream, stoch_order_betting_stream, Discreteness, Estimator,
    QuantilePairBet, StochOrderBet,
};
