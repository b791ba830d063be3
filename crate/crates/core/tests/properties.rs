use proptest::prelude::*;
use seqcal::discrete::{betabinomial_pmf, EmpiricalBet};
use seqcal::order::{bernstein_fit, discretize_density, grenander_fit, Direction, BERNSTEIN_DEGREE};
use seqcal::strategy::ResidueBet;
use seqcal::uniform::kernel_betting_stream;
use seqcal::{pit, quantile_pit, randomized_rank, CdfSpec, EProcess, QuantileForecast};

fn merged(e: &[f64], h: usize) -> f64 {
    (0..h).map(|k| e.iter().skip(k).step_by(h).product::<f64>()).sum::<f64>() / h as f64
}

proptest! {
    #[test]
    fn rank_matches_scaled_pit(
        members in prop::collection::vec(0u8..4, 1..9),
        y in 0u8..5,
        v in 0u32..64,
    ) {
        let members: Vec<f64> = members.into_iter().map(f64::from).collect();
        let (y, v) = (f64::from(y) - 0.5 * f64::from(y % 2), f64::from(v) / 64.0);
        let m = members.len() as f64;
        let z = pit(&CdfSpec::empirical(members.clone()).unwrap(), y, v).unwrap();
        prop_assert_eq!(randomized_rank(&members, y, v).unwrap(), 1 + (m * z).floor() as usize);
    }

    #[test]
    fn quantile_pit_brackets_pit(
        mean in -2.0f64..2.0,
        sd in 0.2f64..3.0,
        k in 1usize..30,
        y in -6.0f64..6.0,
        v in 0.0f64..=1.0,
    ) {
        let levels = QuantileForecast::equispaced_levels(k);
        let cdf = CdfSpec::gaussian(mean, sd).unwrap();
        let q = levels.iter().map(|&a| mean + sd * seqcal::special::norm_quantile(a)).collect();
        let f = QuantileForecast::new(levels, q).unwrap();
        let (zu, zl) = quantile_pit(&f, y, v).unwrap();
        let z = pit(&cdf, y, v).unwrap();
        prop_assert!(zu <= z + 1e-12 && z <= zl + 1e-12, "{zu} {z} {zl}");
        prop_assert!(((zl - zu) - 1.0 / (k + 1) as f64).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn eprocess_matches_direct_merge(e in prop::collection::vec(0.0f64..4.0, 1..40), h in 1usize..6) {
        let mut p = EProcess::new(h).unwrap();
        let mut max = 0.0f64;
        for (t, &x) in e.iter().enumerate() {
            let rec = p.push(x).unwrap();
            let want = merged(&e[..=t], h);
            prop_assert!((rec.e - want).abs() <= 1e-12 * want.max(1e-300) || (want == 0.0 && rec.e == 0.0));
            max = max.max(want);
            prop_assert!(rec.running_max >= rec.e * (1.0 - 1e-12));
            prop_assert!(rec.p > 0.0 && rec.p <= 1.0);
        }
        prop_assert!((p.anytime_p() - (1.0 / max).min(1.0)).abs() <= 1e-12);
    }

    #[test]
    fn empirical_weights_have_unit_mean(history in prop::collection::vec(1usize..8, 0..60), m in 7usize..12) {
        let mut bet = EmpiricalBet::with_warmup(m, 0);
        for &r in &history {
            bet.bet(1, r);
        }
        // Under the null each rank has probability 1/m, so E[e] is the weight sum.
        let mean: f64 = bet.weights().iter().sum();
        prop_assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn betabinomial_sums_to_one(a in 0.001f64..100.0, b in 0.001f64..100.0, m in 1usize..80) {
        let s: f64 = (1..=m).map(|r| betabinomial_pmf(r, m, a, b).unwrap()).sum();
        prop_assert!((s - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn grenander_is_a_monotone_density(xs in prop::collection::vec(0.0f64..=1.0, 1..60)) {
        let inc = grenander_fit(&xs, Direction::Increasing).unwrap();
        let steps = inc.steps().unwrap();
        prop_assert!((inc.integral() - 1.0).abs() <= 1e-12);
        prop_assert!(steps.windows(2).all(|w| w[0].2 <= w[1].2));
        let dec = grenander_fit(&xs, Direction::Decreasing).unwrap();
        prop_assert!((dec.integral() - 1.0).abs() <= 1e-12);
        let d = dec.steps().unwrap();
        prop_assert!(d.windows(2).all(|w| w[0].2 >= w[1].2));
    }

    #[test]
    fn discretization_dominates_at_support_points(
        xs in prop::collection::vec(0.0f64..=1.0, 5..40),
        cuts in prop::collection::btree_set(1u32..100, 0..8),
    ) {
        let mut support = vec![0.0];
        support.extend(cuts.into_iter().map(|c| f64::from(c) / 100.0));
        for f in [
            grenander_fit(&xs, Direction::Increasing).unwrap(),
            bernstein_fit(&xs, Direction::Increasing, BERNSTEIN_DEGREE).unwrap(),
        ] {
            let g = discretize_density(&f, &support).unwrap();
            prop_assert!((g.integral() - f.integral()).abs() <= 1e-9);
            for &s in &support {
                prop_assert!(g.eval(s) >= f.eval(s) - 1e-9, "s={s}: {} < {}", g.eval(s), f.eval(s));
            }
        }
    }

    #[test]
    fn kernel_evalues_stay_above_mixing_floor(xs in prop::collection::vec(0.0f64..=1.0, 12..40)) {
        let e = kernel_betting_stream(&xs, 1).unwrap();
        for (t, &v) in e.iter().enumerate() {
            if t >= 10 {
                prop_assert!(v >= 1.0 / (t + 1) as f64 - 1e-15);
            } else {
                prop_assert_eq!(v, 1.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bernstein_fit_is_monotone(xs in prop::collection::vec(0.0f64..=1.0, 1..200), increasing in any::<bool>()) {
        let dir = if increasing { Direction::Increasing } else { Direction::Decreasing };
        let f = bernstein_fit(&xs, dir, BERNSTEIN_DEGREE).unwrap();
        prop_assert!((f.integral() - 1.0).abs() <= 1e-5);
        let grid: Vec<f64> = (0..=1000).map(|i| f.eval(i as f64 / 1000.0)).collect();
        for w in grid.windows(2) {
            if increasing {
                prop_assert!(w[1] >= w[0] - 1e-9);
            } else {
                prop_assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }
}
