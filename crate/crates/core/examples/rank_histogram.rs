//! Rank-histogram e-values for a 20-member ensemble with a dispersion error.

use seqcal::baseline::{chisquare_uniform, rank_counts};
use seqcal::discrete::{betabinomial_betting_stream, empirical_betting_stream, fit_betabinomial_mle};
use seqcal::sim::{generate, Scenario, ScenarioKind};
use seqcal::{CalibrationValue, EProcess};

fn main() -> seqcal::Result<()> {
    // Variance 0.6 instead of 1: ranks pile up at both ends.
    let scenario = Scenario { epsilon: 0.0, delta: -0.4, kind: ScenarioKind::Ensemble { members: 20 }, n: 360, seed: 8, stream: 0 };
    let ranks: Vec<usize> = generate(&scenario)?
        .into_iter()
        .map(|v| match v {
            CalibrationValue::Rank { rank, .. } => rank,
            _ => unreachable!("ensemble scenario"),
        })
        .collect();

    let counts = rank_counts(&ranks, 21)?;
    println!("histogram: {counts:?}");
    let fit = fit_betabinomial_mle(&counts)?;
    println!("betabinomial fit: alpha = {:.3}, beta = {:.3}", fit.alpha, fit.beta);

    for (name, evalues) in [
        ("betabinomial", betabinomial_betting_stream(&ranks, 21, 1)?),
        ("empirical", empirical_betting_stream(&ranks, 21, 1)?),
    ] {
        let mut p = EProcess::new(1)?;
        for e in evalues {
            p.push(e)?;
        }
        println!("{name:>12}: max e = {:.3e}, stop = {:?}", p.running_max(), p.stop_tau_alpha(0.05)?);
    }
    println!("chi-square p-value: {:.2e}", chisquare_uniform(&counts)?.p_value);
    Ok(())
}
