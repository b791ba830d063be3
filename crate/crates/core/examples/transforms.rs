//! PIT values, randomized ranks and quantile PIT pairs for a few forecasts.

use seqcal::{pit, quantile_pit, randomized_rank, CdfSpec, QuantileForecast};

fn main() -> seqcal::Result<()> {
    let gauss = CdfSpec::gaussian(0.0, 1.0)?;
    println!("N(0,1) forecast, y = 1.2:       PIT = {:.4}", pit(&gauss, 1.2, 0.5)?);

    // A precipitation-style forecast with a point mass at zero.
    let censored = CdfSpec::logistic_censored(0.3, 1.0)?;
    for v in [0.0, 0.5, 1.0] {
        println!("censored logistic, y = 0, v = {v}: PIT = {:.4}", pit(&censored, 0.0, v)?);
    }

    let ensemble = [0.2, -1.0, 0.7, 0.7, 1.9];
    for v in [0.1, 0.6] {
        println!("ensemble {ensemble:?}, y = 0.7, v = {v}: rank = {}", randomized_rank(&ensemble, 0.7, v)?);
    }

    let levels = QuantileForecast::equispaced_levels(3);
    let forecast = QuantileForecast::new(levels, vec![-0.7, 0.0, 0.7])?;
    for y in [-2.0, 0.3, 5.0] {
        let (zu, zl) = quantile_pit(&forecast, y, 0.5)?;
        println!("quartile forecast, y = {y}: (z_u, z_l) = ({zu}, {zl})");
    }
    Ok(())
}
