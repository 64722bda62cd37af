//! Runs a resolved configuration and flattens the results into tidy rows.

use anyhow::{Context, Result};
use myopic_core::discrete_kelly::{expected_log_growth, kelly_multi_paper, optimize_fraction};
use myopic_core::hedging::{delta_hedge_pnl, HedgeConfig};
use myopic_core::impact::{commutator, run_sequence, two_venue_cycle, MarketState};
use myopic_core::lottery::{best_number, expected_house_payout, expected_ticket_value, simulate_lottery};
use myopic_core::stats::{mean_and_se, summarize_metrics, PathMetrics};
use myopic_core::strategies::{arena, MarketSpec};
use myopic_core::{GridSpec, Seed};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    ArenaConfig, ExperimentConfig, ExperimentKind, HedgeExperiment, ImpactExperiment, KellyConfig, LotteryConfig,
    SdeConfig,
};
use crate::output::Row;

/// Label given to rows that aggregate over seeds.
pub const ALL_SEEDS: &str = "all";

pub struct Outcome {
    pub rows: Vec<Row>,
    pub summary: Value,
}

struct Rows {
    experiment: &'static str,
    seed: String,
    rows: Vec<Row>,
}

impl Rows {
    fn new(kind: ExperimentKind, seed: impl ToString) -> Self {
        Rows {
            experiment: kind.name(),
            seed: seed.to_string(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, label: impl Into<String>, metric: impl Into<String>, value: f64) {
        let seed = self.seed.clone();
        self.push_seeded(seed, label, metric, value);
    }

    fn push_seeded(&mut self, seed: impl Into<String>, label: impl Into<String>, metric: impl Into<String>, value: f64) {
        self.rows.push(Row {
            experiment: self.experiment.into(),
            seed: seed.into(),
            label: label.into(),
            metric: metric.into(),
            value,
        });
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).context("serializing summary")
}

pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    let seed = config.seed;
    match config.experiment {
        ExperimentKind::Kelly => kelly(config.kelly.as_ref().context("missing [kelly]")?, seed),
        ExperimentKind::Lottery => lottery(config.lottery.as_ref().context("missing [lottery]")?, seed),
        ExperimentKind::Sde => sde(config.sde.as_ref().context("missing [sde]")?, seed),
        ExperimentKind::Arena => run_arena(config.arena.as_ref().context("missing [arena]")?, seed),
        ExperimentKind::Hedge => hedge(config.hedge.as_ref().context("missing [hedge]")?, seed),
        ExperimentKind::Impact => impact(config.impact.as_ref().context("missing [impact]")?, seed),
    }
}

#[derive(Serialize)]
struct KellyLine {
    n: u32,
    paper_fraction: f64,
    numeric_fraction: f64,
    paper_growth: f64,
    numeric_growth: f64,
}

fn kelly(c: &KellyConfig, seed: u64) -> Result<Outcome> {
    let mut rows = Rows::new(ExperimentKind::Kelly, seed);
    let mut table = Vec::new();
    for n in 1..=c.n_max {
        let paper = kelly_multi_paper(c.p, n)?;
        let numeric = optimize_fraction(c.p, n, c.tol)?;
        // the closed form rounds to 1 once q^n/p^n underflows; betting
        // everything risks ruin, so its growth is -inf
        let paper_growth = if paper < 1.0 {
            expected_log_growth(c.p, n, paper)?
        } else {
            f64::NEG_INFINITY
        };
        let numeric_growth = expected_log_growth(c.p, n, numeric)?;
        let label = format!("n={n}");
        rows.push(&label, "paper_fraction", paper);
        rows.push(&label, "numeric_fraction", numeric);
        rows.push(&label, "fraction_gap", numeric - paper);
        rows.push(&label, "paper_growth", paper_growth);
        rows.push(&label, "numeric_growth", numeric_growth);
        table.push(KellyLine {
            n,
            paper_fraction: paper,
            numeric_fraction: numeric,
            paper_growth,
            numeric_growth,
        });
    }
    Ok(Outcome {
        rows: rows.rows,
        summary: json!({ "p": c.p, "table": to_json(&table)? }),
    })
}

fn lottery(c: &LotteryConfig, seed: u64) -> Result<Outcome> {
    let spec = c.spec()?;
    let master = Seed::new(seed);
    let records = (0..spec.n_numbers())
        .into_par_iter()
        .map(|i| simulate_lottery(&spec, i, c.draws, master.child(i as u64)))
        .collect::<myopic_core::Result<Vec<_>>>()?;
    let mut rows = Rows::new(ExperimentKind::Lottery, seed);
    let mut exact = Vec::new();
    for record in &records {
        let ev = expected_ticket_value(&spec, record.number)?;
        let label = format!("number={}", record.number);
        rows.push(&label, "exact_ev", ev);
        rows.push(&label, "exact_net", ev - spec.ticket_price());
        rows.push(&label, "mc_mean_net", record.mean_net_payoff);
        rows.push(&label, "mc_std_error", record.std_error);
        rows.push(&label, "hit_rate", record.hit_rate);
        exact.push(ev);
    }
    let (best, best_ev) = best_number(&spec);
    let house = expected_house_payout(&spec);
    rows.push("house", "expected_payout", house);
    rows.push("house", "best_number", best as f64);
    Ok(Outcome {
        rows: rows.rows,
        summary: json!({
            "spec": to_json(&spec)?,
            "exact_ev": exact,
            "best_number": best,
            "best_ev": best_ev,
            "expected_house_payout": house,
            "monte_carlo": to_json(&records)?,
        }),
    })
}

fn checkpoint_indices(grid: GridSpec, count: usize) -> Vec<usize> {
    let n = grid.n_steps;
    let mut idx: Vec<usize> = (1..=count).map(|j| (j * n).div_ceil(count)).collect();
    idx.dedup();
    idx
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
}

fn sde(c: &SdeConfig, seed: u64) -> Result<Outcome> {
    let grid = match c.market {
        MarketSpec::StochasticDrift { grid, .. } | MarketSpec::TrendOu { grid, .. } | MarketSpec::Gbm { grid, .. } => grid,
        MarketSpec::Discrete { .. } => anyhow::bail!("discrete games have no price path"),
    };
    let checkpoints = checkpoint_indices(grid, c.checkpoints);
    let times = grid.times();
    let master = Seed::new(seed);
    // per path: price metrics plus price and lambda at each checkpoint
    let samples = (0..c.paths)
        .into_par_iter()
        .map(|i| -> myopic_core::Result<(PathMetrics, Vec<f64>, Option<Vec<f64>>)> {
            let (price, lambda) = c.market.simulate(master.child(i as u64))?;
            let at = |v: &[f64]| checkpoints.iter().map(|&k| v[k]).collect::<Vec<_>>();
            let metrics = PathMetrics::from_wealth(&price)?;
            Ok((metrics, at(price.values()), lambda.map(|l| at(l.values()))))
        })
        .collect::<myopic_core::Result<Vec<_>>>()?;

    let mut rows = Rows::new(ExperimentKind::Sde, seed);
    for (j, &k) in checkpoints.iter().enumerate() {
        let t = times[k];
        let label = format!("t={t}");
        let prices: Vec<f64> = samples.iter().map(|s| s.1[j]).collect();
        rows.push(&label, "price_mean", mean_and_se(&prices).0);
        rows.push(&label, "price_variance", sample_variance(&prices));
        match c.market {
            MarketSpec::TrendOu { params, .. } => {
                rows.push(&label, "price_mean_exact", params.mean(t));
                rows.push(&label, "price_variance_exact", params.variance(t));
            }
            MarketSpec::Gbm { mu, sigma, s0, .. } => {
                let m = s0 * (mu * t).exp();
                rows.push(&label, "price_mean_exact", m);
                rows.push(&label, "price_variance_exact", m * m * (sigma * sigma * t).exp_m1());
            }
            MarketSpec::StochasticDrift { params, .. } => {
                let lambdas: Vec<f64> = samples.iter().filter_map(|s| s.2.as_ref().map(|l| l[j])).collect();
                rows.push(&label, "lambda_mean", mean_and_se(&lambdas).0);
                rows.push(&label, "lambda_variance", sample_variance(&lambdas));
                rows.push(&label, "lambda_mean_exact", params.lambda_mean(t));
                rows.push(&label, "lambda_variance_exact", params.lambda_variance(t));
            }
            MarketSpec::Discrete { .. } => unreachable!(),
        }
    }
    let metrics: Vec<PathMetrics> = samples.iter().map(|s| s.0).collect();
    let stats = summarize_metrics(&metrics)?;
    push_stats(&mut rows, "price", &stats);
    Ok(Outcome {
        rows: rows.rows,
        summary: json!({ "model": c.market.name(), "price": to_json(&stats)? }),
    })
}

fn push_stats(rows: &mut Rows, label: &str, stats: &myopic_core::SummaryStats) {
    rows.push_seeded(ALL_SEEDS, label, "mean_log_growth", stats.mean_log_growth);
    rows.push_seeded(ALL_SEEDS, label, "growth_std_error", stats.growth_std_error);
    rows.push_seeded(ALL_SEEDS, label, "max_drawdown", stats.max_drawdown);
    for &(level, q) in &stats.terminal_log_wealth_quantiles {
        rows.push_seeded(ALL_SEEDS, label, format!("terminal_log_wealth_q{:02}", (level * 100.0).round()), q);
    }
}

fn run_arena(c: &ArenaConfig, seed: u64) -> Result<Outcome> {
    let report = arena(&c.policies, &c.market, c.seeds, Seed::new(seed))?;
    let mut rows = Rows::new(ExperimentKind::Arena, seed);
    for (j, label) in report.labels.iter().enumerate() {
        for (i, m) in report.per_seed[j].iter().enumerate() {
            rows.push_seeded(i.to_string(), label, "log_growth", m.log_growth);
            rows.push_seeded(i.to_string(), label, "max_drawdown", m.max_drawdown);
        }
    }
    for (j, label) in report.labels.iter().enumerate() {
        push_stats(&mut rows, label, &report.stats[j]);
        let rank = report.ranking.iter().position(|&r| r == j).expect("ranked") + 1;
        rows.push_seeded(ALL_SEEDS, label, "rank", rank as f64);
        rows.push_seeded(ALL_SEEDS, label, "bankruptcies", report.bankruptcies[j] as f64);
        for (k, other) in report.labels.iter().enumerate() {
            if k != j {
                rows.push_seeded(ALL_SEEDS, label, format!("win_rate_vs:{other}"), report.win_rates[j][k]);
                rows.push_seeded(ALL_SEEDS, label, format!("paired_t_vs:{other}"), report.paired[j][k].t_statistic());
            }
        }
    }
    Ok(Outcome {
        rows: rows.rows,
        summary: json!({ "market": to_json(&c.market)?, "report": to_json(&report)? }),
    })
}

#[derive(Serialize)]
struct HedgeLine {
    rehedge_steps: usize,
    mean_pnl: f64,
    pnl_std_error: f64,
    mean_predicted: f64,
    mean_gap: f64,
    gap_std_error: f64,
    mean_abs_gap: f64,
}

fn hedge(c: &HedgeExperiment, seed: u64) -> Result<Outcome> {
    let grid = GridSpec::new(c.option.maturity, c.fine_steps)?;
    let master = Seed::new(seed);
    let configs: Vec<HedgeConfig> = c
        .rehedge_steps
        .iter()
        .map(|&k| HedgeConfig {
            implied_vol: c.implied_vol,
            realized_vol: c.realized_vol,
            rate: c.rate,
            rehedge_steps: k,
        })
        .collect();
    // every rehedge frequency sees the same paths
    let per_path = (0..c.paths)
        .into_par_iter()
        .map(|i| -> myopic_core::Result<Vec<(f64, f64)>> {
            let path = myopic_core::sde_models::simulate_gbm(c.mu, c.realized_vol, c.s0, grid, master.child(i as u64))?;
            configs
                .iter()
                .map(|cfg| delta_hedge_pnl(&path, &c.option, cfg).map(|r| (r.realized_pnl, r.predicted_accrual)))
                .collect()
        })
        .collect::<myopic_core::Result<Vec<_>>>()?;

    let mut rows = Rows::new(ExperimentKind::Hedge, seed);
    let mut lines = Vec::new();
    for (j, &k) in c.rehedge_steps.iter().enumerate() {
        let pnl: Vec<f64> = per_path.iter().map(|v| v[j].0).collect();
        let predicted: Vec<f64> = per_path.iter().map(|v| v[j].1).collect();
        let gap: Vec<f64> = per_path.iter().map(|v| v[j].0 - v[j].1).collect();
        let abs_gap: Vec<f64> = gap.iter().map(|g| g.abs()).collect();
        let (mean_pnl, pnl_se) = mean_and_se(&pnl);
        let (mean_gap, gap_se) = mean_and_se(&gap);
        let line = HedgeLine {
            rehedge_steps: k,
            mean_pnl,
            pnl_std_error: pnl_se,
            mean_predicted: mean_and_se(&predicted).0,
            mean_gap,
            gap_std_error: gap_se,
            mean_abs_gap: mean_and_se(&abs_gap).0,
        };
        let label = format!("steps={k}");
        rows.push(&label, "mean_pnl", line.mean_pnl);
        rows.push(&label, "pnl_std_error", line.pnl_std_error);
        rows.push(&label, "mean_predicted", line.mean_predicted);
        rows.push(&label, "mean_gap", line.mean_gap);
        rows.push(&label, "gap_std_error", line.gap_std_error);
        rows.push(&label, "mean_abs_gap", line.mean_abs_gap);
        lines.push(line);
    }
    Ok(Outcome {
        rows: rows.rows,
        summary: json!({ "option": to_json(&c.option)?, "by_rehedge_steps": to_json(&lines)? }),
    })
}

fn impact(c: &ImpactExperiment, seed: u64) -> Result<Outcome> {
    let initial = MarketState::new(c.initial_mid);
    let gap = commutator(&c.seq_a, &c.seq_b, &c.venue, &initial)?;
    let ab = run_sequence(&run_sequence(&initial, &c.seq_a, &c.venue)?, &c.seq_b, &c.venue)?;
    let ba = run_sequence(&run_sequence(&initial, &c.seq_b, &c.venue)?, &c.seq_a, &c.venue)?;
    let mut rows = Rows::new(ExperimentKind::Impact, seed);
    rows.push("commutator", "price_gap", gap.price_gap);
    rows.push("commutator", "cash_gap", gap.cash_gap);
    for (label, state) in [("a-then-b", &ab), ("b-then-a", &ba)] {
        rows.push(label, "mid_price", state.mid_price());
        rows.push(label, "cash", state.cash);
        rows.push(label, "inventory", state.inventory);
    }
    let cycle = match &c.cycle {
        Some(cycle) => {
            let report = two_venue_cycle(&cycle.hot, &cycle.cold, cycle.size, cycle.rounds, cycle.rest)?;
            rows.push("cycle", "mean_net_cash", report.mean_net_cash);
            rows.push("cycle", "engine_runs", f64::from(u8::from(report.engine_runs)));
            rows.push("cycle", "final_inventory", report.final_inventory);
            for (i, cash) in report.net_cash_per_round.iter().enumerate() {
                rows.push(format!("round={}", i + 1), "net_cash", *cash);
            }
            Some(report)
        }
        None => None,
    };
    Ok(Outcome {
        rows: rows.rows,
        summary: json!({
            "commutator": to_json(&gap)?,
            "a_then_b": to_json(&ab)?,
            "b_then_a": to_json(&ba)?,
            "cycle": to_json(&cycle)?,
        }),
    })
}
