use myopic_core::discrete_kelly::*;
use myopic_core::strategies::{backtest_discrete, MultiGameSource, Policy};
use myopic_core::{GameSpec, Seed};

/// First-order condition for n games solved by plain bisection with integer
/// binomial coefficients; shares nothing with the library's optimizer.
fn brute_force_optimum(p: f64, n: u32) -> f64 {
    let q = 1.0 - p;
    let mut terms = Vec::new();
    let mut choose = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            choose = choose * f64::from(n - k + 1) / f64::from(k);
        }
        let w = choose * p.powi(k as i32) * q.powi((n - k) as i32);
        terms.push((w, (2.0 * f64::from(k) - f64::from(n)) / f64::from(n)));
    }
    let slope = |f: f64| terms.iter().map(|&(w, x)| w * x / (1.0 + f * x)).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-12);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn three_games_optimum_exceeds_closed_form() {
    let paper = kelly_multi_paper(0.6, 3).unwrap();
    assert!((paper - 0.542_857_142_857_142_8).abs() < 1e-15);
    // slope of G at the closed form, by the binomial-sum oracle
    assert!(expected_log_growth_slope(0.6, 3, paper).unwrap() > 0.0);
    let oracle = brute_force_optimum(0.6, 3);
    // frozen from the oracle (also confirmed at 30 digits with mpmath)
    assert!((oracle - 0.552_595_784_834_478_4).abs() < 1e-12);
    let numeric = optimize_fraction(0.6, 3, DEFAULT_TOL).unwrap();
    assert!((numeric - oracle).abs() < 1e-9);
    assert!((numeric - paper - 0.009_738_641_977_335_6).abs() < 1e-9);
}

#[test]
fn optimizer_matches_brute_force() {
    for &p in &[0.52, 0.6, 0.7, 0.85] {
        for n in [1, 2, 3, 4, 7, 12] {
            let a = optimize_fraction(p, n, DEFAULT_TOL).unwrap();
            let b = brute_force_optimum(p, n);
            assert!((a - b).abs() < 1e-8, "p={p} n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn diversified_growth_never_decreases() {
    let mut last = f64::NEG_INFINITY;
    for n in 1..=30 {
        let f = optimize_fraction(0.6, n, DEFAULT_TOL).unwrap();
        let g = expected_log_growth(0.6, n, f).unwrap();
        assert!(g >= last, "n={n}");
        last = g;
    }
}

#[test]
fn simulated_growth_matches_expectation() {
    let game = GameSpec::new(0.6, 1).unwrap();
    let alloc = Allocation::new(0.2, 1).unwrap();
    let rounds = 100_000;
    let path = simulate_rounds(game, alloc, rounds, Seed::new(2024)).unwrap();
    let increments: Vec<f64> = path.values().windows(2).map(|w| w[1] - w[0]).collect();
    let (mean, se) = myopic_core::stats::mean_and_se(&increments);
    let expected = expected_log_growth(0.6, 1, 0.2).unwrap();
    assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn five_games_beat_one_paired_over_seeds() {
    let game = GameSpec::new(0.6, 5).unwrap();
    let multi = Policy::MultiGameKelly {
        source: MultiGameSource::NumericOptimum,
    };
    let root = Seed::new(77);
    let mut single_total = 0.0;
    let mut multi_total = 0.0;
    for i in 0..100 {
        let seed = root.child(i);
        single_total += backtest_discrete(&Policy::SingleGameKelly, game, 100_000, seed).unwrap().last();
        multi_total += backtest_discrete(&multi, game, 100_000, seed).unwrap().last();
    }
    let g1 = expected_log_growth(0.6, 1, 0.2).unwrap();
    let f5 = optimize_fraction(0.6, 5, DEFAULT_TOL).unwrap();
    let g5 = expected_log_growth(0.6, 5, f5).unwrap();
    assert!(g5 > g1);
    assert!(multi_total > single_total);
    let per_round = (multi_total - single_total) / (100.0 * 100_000.0);
    assert!((per_round - (g5 - g1)).abs() < 0.1 * (g5 - g1));
}
