//! Calibration of 19 quantile forecasts via the upper/lower quantile PIT.

use seqcal::baseline::{bonferroni_pair, ks_one_sided, KsSide};
use seqcal::order::{quantile_calibration_stream, Estimator};
use seqcal::sim::{generate, Scenario, ScenarioKind};
use seqcal::{CalibrationValue, EProcess, QuantileForecast};

fn main() -> seqcal::Result<()> {
    // Overdispersed quantiles: variance 1.5 against N(0, 1) outcomes.
    let kind = ScenarioKind::Quantile { levels: QuantileForecast::equispaced_levels(19) };
    let s = Scenario { epsilon: 0.0, delta: 0.5, kind, n: 360, seed: 4, stream: 0 };
    let pairs: Vec<(f64, f64)> = generate(&s)?
        .into_iter()
        .map(|v| match v {
            CalibrationValue::QuantilePit { upper, lower } => (upper, lower),
            _ => unreachable!(),
        })
        .collect();
    println!("first pairs: {:?}", &pairs[..3]);

    for (name, est) in [("grenander", Estimator::Grenander), ("bernstein", Estimator::bernstein())] {
        let mut p = EProcess::new(1)?;
        for e in quantile_calibration_stream(&pairs, 1, est)? {
            p.push(e)?;
        }
        println!("{name}: max e = {:.3e}, stop = {:?}", p.running_max(), p.stop_tau_alpha(0.05)?);
    }

    let (zu, zl): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let pu = ks_one_sided(&zu, KsSide::Less)?.p_value;
    let pl = ks_one_sided(&zl, KsSide::Greater)?.p_value;
    println!("one-sided KS: p_u = {pu:.3}, p_l = {pl:.3}, Bonferroni = {:.3}", bonferroni_pair(pu, pl));
    Ok(())
}
