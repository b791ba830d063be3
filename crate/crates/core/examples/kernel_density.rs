//! Boundary-corrected kernel density estimate on [0, 1] and kernel e-values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use seqcal::uniform::{kernel_betting_stream, plugin_bandwidth, BoundaryKde};
use seqcal::EProcess;

fn main() -> seqcal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // U-shaped PIT values, as produced by an underdispersed forecast.
    let dist = Beta::new(0.7, 0.7).expect("valid parameters");
    let zs: Vec<f64> = (0..300).map(|_| dist.sample(&mut rng)).collect();

    let kde = BoundaryKde::fit(&zs)?;
    println!("plug-in bandwidth {:.4} (direct call: {:.4})", kde.bandwidth(), plugin_bandwidth(&zs)?);
    println!("integral of the table: {:.6}", kde.integral());
    for z in [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0] {
        println!("  f({z:.2}) = {:.3}", kde.eval(z));
    }

    let mut process = EProcess::new(1)?;
    for e in kernel_betting_stream(&zs, 1)? {
        process.push(e)?;
    }
    println!("e_300 = {:.3e}, anytime p = {:.2e}", process.current(), process.anytime_p());
    Ok(())
}
