use myopic_core::lottery::*;
use myopic_core::Seed;

/// Every assignment of picks to the `M` crowd players, weighted by its
/// probability, for every drawn number.
fn enumerate_ev(popularity: &[f64], draw: &[f64], m: usize, jackpot: f64, mine: usize) -> f64 {
    let k = popularity.len();
    let mut total = 0.0;
    let mut picks = vec![0usize; m];
    loop {
        let prob: f64 = picks.iter().map(|&i| popularity[i]).product();
        let sharing = picks.iter().filter(|&&i| i == mine).count();
        total += draw[mine] * prob * jackpot / (sharing as f64 + 1.0);
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == m {
                return total;
            }
            picks[pos] += 1;
            if picks[pos] < k {
                break;
            }
            picks[pos] = 0;
            pos += 1;
        }
    }
}

#[test]
fn exact_ev_matches_enumeration() {
    let cases: Vec<(Vec<f64>, Vec<f64>, usize)> = vec![
        (vec![0.9, 0.1], vec![0.5, 0.5], 1),
        (vec![0.5, 0.3, 0.2], vec![1.0 / 3.0; 3], 4),
        (vec![0.1, 0.2, 0.3, 0.4], vec![0.4, 0.3, 0.2, 0.1], 6),
    ];
    for (pop, draw, m) in cases {
        let spec = LotterySpec::with_draw(pop.clone(), draw.clone(), m as u64, 3.0, 1.0).unwrap();
        for i in 0..pop.len() {
            let exact = expected_ticket_value(&spec, i).unwrap();
            let brute = enumerate_ev(&pop, &draw, m, 3.0, i);
            assert!((exact - brute).abs() < 1e-12, "{exact} vs {brute}");
        }
    }
}

#[test]
fn contrarian_ticket_pumps_money() {
    let spec = LotterySpec::new(vec![0.9, 0.1], 1, 1.0, 0.3).unwrap();
    let good = simulate_lottery(&spec, 1, 400_000, Seed::new(5)).unwrap();
    assert!(good.mean_net_payoff > 0.0);
    assert!((good.mean_net_payoff - 0.175).abs() < 3.0 * good.std_error);
    let bad = simulate_lottery(&spec, 0, 400_000, Seed::new(6)).unwrap();
    assert!(bad.mean_net_payoff < 0.0);
    assert!((bad.mean_net_payoff + 0.025).abs() < 3.0 * bad.std_error);
}

#[test]
fn monte_carlo_converges_for_large_crowd() {
    let spec = LotterySpec::with_draw(vec![0.5, 0.3, 0.15, 0.05], vec![0.25; 4], 200_000, 1000.0, 0.01).unwrap();
    for i in 0..4 {
        let exact = expected_ticket_value(&spec, i).unwrap();
        let mc = simulate_lottery(&spec, i, 200_000, Seed::new(10 + i as u64)).unwrap();
        let net_exact = exact - 0.01;
        assert!((mc.mean_net_payoff - net_exact).abs() < 3.0 * mc.std_error + 1e-15);
    }
}
