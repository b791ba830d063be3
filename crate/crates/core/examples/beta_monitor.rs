//! Sequential monitoring of a biased Gaussian forecast with beta e-values.
//!
//! The forecast N(0.4, 1) is checked against outcomes from N(0, 1); the
//! e-process is printed every 40 steps together with its anytime p-value.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use seqcal::uniform::beta_betting_stream;
use seqcal::{pit, CdfSpec, EProcess};

fn main() -> seqcal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let forecast = CdfSpec::gaussian(0.4, 1.0)?;
    let zs = (0..360)
        .map(|_| pit(&forecast, StandardNormal.sample(&mut rng), 0.5))
        .collect::<seqcal::Result<Vec<f64>>>()?;

    let evalues = beta_betting_stream(&zs, 1)?;
    let mut process = EProcess::new(1)?;
    println!("{:>4} {:>12} {:>10}", "t", "e_t", "p_t");
    for (t, &e) in evalues.iter().enumerate() {
        let rec = process.push(e)?;
        if (t + 1) % 40 == 0 {
            println!("{:>4} {:>12.3} {:>10.2e}", rec.t, rec.e, rec.p);
        }
    }
    match process.stop_tau_alpha(0.05)? {
        Some(t) => println!("calibration rejected at level 0.05 after {t} forecasts"),
        None => println!("no rejection at level 0.05"),
    }
    Ok(())
}
