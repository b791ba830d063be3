//! Sequential e-values for the continuous uniform null `UNIF(0, 1)`.

pub mod beta;
pub mod kernel;

pub use beta::{
    beta_betting_stream, beta_evalue, fit_beta_mle, BetaBet, BetaFit, BetaStats, PARAM_MAX,
    PARAM_MIN,
};
pub use kernel::{
    kernel_betting_stream, plugin_bandwidth, BoundaryKde, KernelBet, DENSITY_GRID_POINTS,
};

/// Observations exactly at 0 or 1 are ignored by the continuous strategies.
pub(crate) fn is_interior(z: f64) -> bool {
    z > 0.0 && z < 1.0
}

pub(crate) fn check_unit(zs: &[f64]) -> crate::Result<()> {
    if let Some(z) = zs.iter().find(|z| !(0.0..=1.0).contains(*z)) {
        return crate::error::invalid(format!("value {z} outside [0, 1]"));
    }
    Ok(())
}
