//! Unfocused forecasts are probabilistically calibrated although they are
//! not the ideal forecast: e-value tests should rarely reject them.

use seqcal::baseline::ks_two_sided;
use seqcal::config::{RunConfig, TestKind};
use seqcal::sim::{rejection_rate, unfocused_pits, unfocused_scenario};
use seqcal::CalibrationValue;

fn main() -> anyhow::Result<()> {
    let zs = unfocused_scenario(100_000, 1);
    println!("KS distance of 1e5 unfocused PIT values: {:.4}", ks_two_sided(&zs)?.statistic);

    let reps = 200;
    for method in ["beta", "kernel", "grenander"] {
        let cfg = RunConfig::new(method.parse::<TestKind>()?, None)?;
        let rate = rejection_rate(&cfg, reps, |r| {
            Ok(unfocused_pits(360, 7, r, 1.0).into_iter().map(CalibrationValue::Pit).collect())
        })?;
        println!("{method:>9}: rejection rate {rate:.3} over {reps} replications");
    }
    Ok(())
}
