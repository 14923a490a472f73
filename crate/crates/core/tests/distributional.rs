//! Monte Carlo checks of distributional behavior beyond the acceptance
//! criteria: statistic dominance under the categorical null, permuted-null
//! two-sample size, power monotonicity, and power escalation with n.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use permutest::harness::{
    categorical_alternative, run_power_curve, sample_multinomial, ScenarioConfig, ScenarioKind,
};
use permutest::testing::{cat_test_degenerate, two_sample_draw, CategoricalSample, NullHypothesis};

#[test]
fn categorical_degenerate_t_g_dominates_t_f() {
    let q = [0.1, 0.1, 0.4, 0.4];
    let null = NullHypothesis::categorical(&q).unwrap();
    let n = 2000u64;
    let reps = 10_000u32;
    let dominated = (0..reps)
        .into_par_iter()
        .filter(|&rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(2024);
            rng.set_stream(rep as u64);
            let sample = CategoricalSample::new(sample_multinomial(&q, n, &mut rng));
            let report = cat_test_degenerate(&sample, &null, 0.05).unwrap();
            report.statistics["T_g"] >= report.statistics["T_f"]
        })
        .count();
    let rate = dominated as f64 / reps as f64;
    assert!(rate >= 0.98, "P(T_g >= T_f) = {rate}");
}

#[test]
fn two_sample_permuted_null_rarely_rejects() {
    // Both columns follow the same distribution up to a relabeling; the
    // rejection rate should stay near alpha.
    let p = [0.1, 0.1, 0.4, 0.4];
    let p_perm = [0.4, 0.1, 0.4, 0.1];
    let n = 2000u64;
    let runs = 200u32;
    let rejects = (0..runs)
        .into_par_iter()
        .filter(|&rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(515);
            rng.set_stream(rep as u64);
            let x = sample_multinomial(&p, n, &mut rng);
            let y = sample_multinomial(&p_perm, n, &mut rng);
            two_sample_draw(&x, &y, 0.05, None).unwrap().reject
        })
        .count();
    let reject_rate = rejects as f64 / runs as f64;
    assert!(
        reject_rate <= 0.10,
        "rejected {reject_rate} of permuted-null runs"
    );
}

#[test]
fn power_curve_nondecreasing_within_monte_carlo_error() {
    let config = ScenarioConfig {
        scenario_id: "3".into(),
        kind: ScenarioKind::Categorical,
        null_reference: vec![0.1, 0.2, 0.3, 0.4],
        alternative_grid: (0..=6).map(|i| i as f64).collect(),
        sample_sizes: vec![1000],
        m_sizes: None,
        replications: 2000,
        alpha: 0.05,
        seed: 42,
        lambda: None,
    };
    let curve = run_power_curve(&config).unwrap();
    for pair in curve.points.windows(2) {
        let slack = 2.0 * (pair[0].std_err + pair[1].std_err);
        assert!(
            pair[1].power + slack >= pair[0].power,
            "power drops from {} (x={}) to {} (x={})",
            pair[0].power,
            pair[0].x,
            pair[1].power,
            pair[1].x
        );
    }
}

#[test]
fn power_escalates_with_sample_size_at_fixed_alternative() {
    // A fixed alternative at positive distance: once the test has power
    // at n0, it is essentially certain at 10 * n0.
    let q = [0.1, 0.2, 0.3, 0.4];
    let null = NullHypothesis::categorical(&q).unwrap();
    let n0 = 500u64;
    let ell = 4.0 / (n0 as f64).sqrt();
    let p_alt = categorical_alternative(&q, ell, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
    let power_at = |n: u64, seed: u64| -> f64 {
        let reps = 500u32;
        let rejects = (0..reps)
            .into_par_iter()
            .filter(|&rep| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(rep as u64);
                let sample = CategoricalSample::new(sample_multinomial(&p_alt, n, &mut rng));
                permutest::testing::cat_test(&sample, &null, 0.05)
                    .unwrap()
                    .reject
            })
            .count();
        rejects as f64 / reps as f64
    };
    let base = power_at(n0, 1);
    let escalated = power_at(10 * n0, 2);
    assert!(
        base >= 0.5,
        "alternative chosen too weak for the escalation check: {base}"
    );
    assert!(escalated >= 0.99, "power at 10*n0 is only {escalated}");
}
