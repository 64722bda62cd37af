use myopic_core::hedging::*;
use myopic_core::path::Path;
use myopic_core::sde_models::{simulate_gbm, GridSpec};
use myopic_core::stats::mean_and_se;
use myopic_core::Seed;
use rayon::prelude::*;

fn atm_call() -> OptionSpec {
    OptionSpec::new(100.0, 1.0, OptionKind::Call).unwrap()
}

#[test]
fn greeks_match_finite_differences() {
    for kind in [OptionKind::Call, OptionKind::Put] {
        let spec = OptionSpec::new(95.0, 0.75, kind).unwrap();
        for &spot in &[70.0, 95.0, 130.0] {
            let g = bs_value_delta_gamma(spot, &spec, 0.25, 0.03, 0.1);
            let h = 1e-4 * spot;
            let up = bs_value_delta_gamma(spot + h, &spec, 0.25, 0.03, 0.1).value;
            let down = bs_value_delta_gamma(spot - h, &spec, 0.25, 0.03, 0.1).value;
            let fd_delta = (up - down) / (2.0 * h);
            let fd_gamma = (up - 2.0 * g.value + down) / (h * h);
            assert!((fd_delta - g.delta).abs() <= 1e-6 * g.delta.abs().max(1e-3), "{kind:?} {spot} {fd_delta} {}", g.delta);
            assert!((fd_gamma - g.gamma).abs() <= 1e-4 * g.gamma.max(1e-4), "{kind:?} {spot}");
        }
    }
}

fn hedge_stats(implied: f64, realized: f64, steps: usize, n_paths: u64, salt: u64) -> ((f64, f64), (f64, f64)) {
    let config = HedgeConfig {
        implied_vol: implied,
        realized_vol: realized,
        rate: 0.0,
        rehedge_steps: steps,
    };
    let grid = GridSpec::new(1.0, steps).unwrap();
    let reports: Vec<HedgeReport> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let path = simulate_gbm(0.0, realized, 100.0, grid, Seed::new(salt).child(i)).unwrap();
            delta_hedge_pnl(&path, &atm_call(), &config).unwrap()
        })
        .collect();
    let pnl: Vec<f64> = reports.iter().map(|r| r.realized_pnl).collect();
    let gap: Vec<f64> = reports.iter().map(|r| r.gap).collect();
    (mean_and_se(&pnl), mean_and_se(&gap))
}

#[test]
fn pnl_sign_follows_volatility_spread() {
    let ((long_vol, se), _) = hedge_stats(0.2, 0.3, 250, 2000, 21);
    assert!(long_vol > 3.0 * se);
    let ((short_vol, se), _) = hedge_stats(0.3, 0.2, 250, 2000, 22);
    assert!(short_vol < -3.0 * se);
}

#[test]
fn gap_shrinks_with_rehedging() {
    let config = |steps| HedgeConfig {
        implied_vol: 0.2,
        realized_vol: 0.3,
        rate: 0.0,
        rehedge_steps: steps,
    };
    let fine = GridSpec::new(1.0, 2000).unwrap();
    let mut mean_abs = Vec::new();
    for steps in [20, 200, 2000] {
        let gaps: Vec<f64> = (0..500u64)
            .into_par_iter()
            .map(|i| {
                let path = simulate_gbm(0.0, 0.3, 100.0, fine, Seed::new(23).child(i)).unwrap();
                delta_hedge_pnl(&path, &atm_call(), &config(steps)).unwrap().gap.abs()
            })
            .collect();
        mean_abs.push(gaps.iter().sum::<f64>() / gaps.len() as f64);
    }
    assert!(mean_abs[1] < 0.5 * mean_abs[0], "{mean_abs:?}");
    assert!(mean_abs[2] < 0.5 * mean_abs[1], "{mean_abs:?}");
}

#[test]
fn deterministic_path_bleeds_theta() {
    // zero realized volatility: the spot just grows at the funding rate
    let rate = 0.02;
    let steps = 20_000;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 / steps as f64).collect();
    let spots: Vec<f64> = times.iter().map(|t| 100.0 * (rate * t).exp()).collect();
    let path = Path::new(times, spots).unwrap();
    let config = HedgeConfig {
        implied_vol: 0.2,
        realized_vol: 1e-300,
        rate,
        rehedge_steps: steps,
    };
    let report = delta_hedge_pnl(&path, &atm_call(), &config).unwrap();
    let premium = bs_value_delta_gamma(100.0, &atm_call(), 0.2, rate, 0.0).value;
    assert!(report.realized_pnl < 0.0);
    assert!(report.predicted_accrual < 0.0);
    // the option finishes at the money forward, so nearly all premium bleeds
    assert!(report.realized_pnl.abs() <= premium * rate.exp() * 1.001);
    assert!(report.gap.abs() < 1e-2 * premium, "{}", report.gap);
}
