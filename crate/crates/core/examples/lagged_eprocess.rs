//! Two-day-ahead forecasts: lag h = 2 merges one product per residue class.
//!
//! Shows the averaged e-process and the sum-of-suprema statistic used for
//! stopping, for a forecast that becomes biased halfway through.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use seqcal::special::norm_cdf;
use seqcal::uniform::beta_betting_stream;
use seqcal::EProcess;

fn main() -> seqcal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let zs: Vec<f64> = (0..400)
        .map(|t| {
            let y: f64 = StandardNormal.sample(&mut rng);
            let bias = if t < 200 { 0.0 } else { 0.5 };
            norm_cdf(y - bias)
        })
        .collect();

    let lag = 2;
    let mut process = EProcess::new(lag)?;
    for e in beta_betting_stream(&zs, lag)? {
        let rec = process.push(e)?;
        if rec.t % 50 == 0 {
            println!("t = {:>3}  e_t = {:>10.3}  statistic = {:>10.3}", rec.t, rec.e, rec.tau_h_statistic.unwrap_or(f64::NAN));
        }
    }
    println!("stopping time at level 0.05: {:?}", process.stop_tau_alpha_h(0.05)?);
    Ok(())
}
