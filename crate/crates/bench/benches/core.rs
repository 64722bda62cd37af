use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use myopic_core::discrete_kelly::{expected_log_growth, optimize_fraction};
use myopic_core::hedging::delta_hedge_pnl;
use myopic_core::impact::{commutator, ImpactParams, MarketState, Order};
use myopic_core::sde_models::{simulate_gbm, simulate_stochastic_drift};
use myopic_core::{GridSpec, HedgeConfig, OptionKind, OptionSpec, Seed, StochasticDriftParams};

fn kelly(c: &mut Criterion) {
    let mut g = c.benchmark_group("kelly");
    for n in [3u32, 10, 50] {
        g.bench_with_input(BenchmarkId::new("expected_log_growth", n), &n, |b, &n| {
            b.iter(|| expected_log_growth(black_box(0.6), n, black_box(0.5)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("optimize_fraction", n), &n, |b, &n| {
            b.iter(|| optimize_fraction(black_box(0.6), n, 1e-12).unwrap())
        });
    }
    g.finish();
}

fn sde(c: &mut Criterion) {
    let params = StochasticDriftParams {
        r: 0.0,
        sigma: 0.2,
        kappa: 1.0,
        lambda_hat: 0.3,
        sigma_hat: 0.4,
        lambda0: 0.3,
        s0: 1.0,
    };
    let grid = GridSpec::new(20.0, 5000).unwrap();
    c.bench_function("stochastic_drift_5000_steps", |b| {
        b.iter(|| simulate_stochastic_drift(&params, grid, black_box(Seed::new(1))).unwrap())
    });
}

fn hedging(c: &mut Criterion) {
    let grid = GridSpec::new(1.0, 5000).unwrap();
    let path = simulate_gbm(0.0, 0.3, 100.0, grid, Seed::new(9)).unwrap();
    let spec = OptionSpec::new(100.0, 1.0, OptionKind::Call).unwrap();
    let mut g = c.benchmark_group("delta_hedge_pnl");
    for steps in [50usize, 500, 5000] {
        let config = HedgeConfig {
            implied_vol: 0.2,
            realized_vol: 0.3,
            rate: 0.0,
            rehedge_steps: steps,
        };
        g.bench_with_input(BenchmarkId::from_parameter(steps), &config, |b, config| {
            b.iter(|| delta_hedge_pnl(black_box(&path), &spec, config).unwrap())
        });
    }
    g.finish();
}

fn impact(c: &mut Criterion) {
    let params = ImpactParams::new(1.0, 0.5, 1.0, 0.5).unwrap();
    let a: Vec<Order> = (0..100).map(|i| Order::buy(1.0, i as f64 * 0.1).unwrap()).collect();
    let b: Vec<Order> = (0..100).map(|i| Order::sell(1.0, 10.0 + i as f64 * 0.1).unwrap()).collect();
    let start = MarketState::new(100.0);
    c.bench_function("commutator_100_orders", |bench| {
        bench.iter(|| commutator(black_box(&a), &b, &params, &start).unwrap())
    });
}

criterion_group!(benches, kelly, sde, hedging, impact);
criterion_main!(benches);
