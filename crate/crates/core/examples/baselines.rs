//! Classical fixed-sample tests used as comparators.

use seqcal::baseline::{bonferroni_pair, chisquare_uniform, kolmogorov_sf, ks_one_sided, ks_two_sided, KsSide};

fn main() -> seqcal::Result<()> {
    let grid: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
    let skewed: Vec<f64> = grid.iter().map(|z| z * z).collect();

    for (name, xs) in [("uniform grid", &grid), ("squared grid", &skewed)] {
        let two = ks_two_sided(xs)?;
        let less = ks_one_sided(xs, KsSide::Less)?;
        let greater = ks_one_sided(xs, KsSide::Greater)?;
        println!(
            "{name:>13}: D = {:.4} (p {:.3}), D- = {:.4} (p {:.3}), D+ = {:.4} (p {:.3})",
            two.statistic, two.p_value, less.statistic, less.p_value, greater.statistic, greater.p_value
        );
    }
    println!("P(K > 1.358) = {:.4}", kolmogorov_sf(1.358));

    let r = chisquare_uniform(&[30, 10])?;
    println!("chi-square on (30, 10): X2 = {}, p = {:.6}", r.statistic, r.p_value);
    println!("Bonferroni(0.02, 0.9) = {}", bonferroni_pair(0.02, 0.9));
    Ok(())
}
