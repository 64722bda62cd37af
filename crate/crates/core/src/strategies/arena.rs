use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::stats::{mean_and_se, summarize_metrics, PathMetrics, SummaryStats};

use super::{backtest_continuous, backtest_discrete, check_compatible, MarketSpec, Policy};

/// Mean and standard error of a per-seed difference in log growth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedDifference {
    pub mean: f64,
    pub std_error: f64,
}

impl PairedDifference {
    /// `mean / std_error`, infinite when the difference is constant and
    /// non-zero.
    pub fn t_statistic(&self) -> f64 {
        if self.std_error > 0.0 {
            self.mean / self.std_error
        } else if self.mean == 0.0 {
            0.0
        } else {
            self.mean.signum() * f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaReport {
    pub labels: Vec<String>,
    pub stats: Vec<SummaryStats>,
    /// `win_rates[a][b]`: fraction of seeds on which `a` ends with more
    /// wealth than `b`, ties counting one half.
    pub win_rates: Vec<Vec<f64>>,
    /// `paired[a][b]`: log growth of `a` minus that of `b`, paired by seed.
    pub paired: Vec<Vec<PairedDifference>>,
    /// Policy indices by decreasing mean log growth.
    pub ranking: Vec<usize>,
    /// Seeds on which each policy went bankrupt.
    pub bankruptcies: Vec<usize>,
    /// `per_seed[policy][seed]`.
    pub per_seed: Vec<Vec<PathMetrics>>,
}

impl ArenaReport {
    pub fn n_seeds(&self) -> usize {
        self.per_seed.first().map_or(0, Vec::len)
    }

    pub fn win_rate(&self, a: usize, b: usize) -> f64 {
        self.win_rates[a][b]
    }
}

/// Races `policies` on `n_seeds` common market scenarios.
///
/// Scenario `i` uses the stream `seed.child(i)` for every policy, so the
/// comparison is paired; the report is identical for any thread count.
pub fn arena(policies: &[Policy], market: &MarketSpec, n_seeds: usize, seed: Seed) -> Result<ArenaReport> {
    if policies.is_empty() {
        return Err(Error::EmptyInput("arena needs at least one policy"));
    }
    if n_seeds == 0 {
        return Err(Error::invalid("n_seeds", "must be at least 1"));
    }
    for policy in policies {
        check_compatible(policy, market)?;
    }
    let per_seed: Vec<Vec<(PathMetrics, bool)>> = (0..n_seeds)
        .into_par_iter()
        .map(|i| run_scenario(policies, market, seed.child(i as u64)))
        .collect::<Result<_>>()?;

    let k = policies.len();
    let mut by_policy: Vec<Vec<PathMetrics>> = vec![Vec::with_capacity(n_seeds); k];
    let mut bankruptcies = vec![0; k];
    for scenario in &per_seed {
        for (j, &(m, bankrupt)) in scenario.iter().enumerate() {
            by_policy[j].push(m);
            bankruptcies[j] += usize::from(bankrupt);
        }
    }
    let stats: Vec<SummaryStats> = by_policy
        .iter()
        .map(|m| summarize_metrics(m))
        .collect::<Result<_>>()?;

    let mut win_rates = vec![vec![0.5; k]; k];
    let mut paired = vec![vec![PairedDifference { mean: 0.0, std_error: 0.0 }; k]; k];
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            let score: f64 = by_policy[a]
                .iter()
                .zip(&by_policy[b])
                .map(|(x, y)| match x.terminal_log_wealth.partial_cmp(&y.terminal_log_wealth) {
                    Some(std::cmp::Ordering::Greater) => 1.0,
                    Some(std::cmp::Ordering::Equal) => 0.5,
                    _ => 0.0,
                })
                .sum();
            win_rates[a][b] = score / n_seeds as f64;
            let diffs: Vec<f64> = by_policy[a]
                .iter()
                .zip(&by_policy[b])
                .map(|(x, y)| x.log_growth - y.log_growth)
                .collect();
            let (mean, std_error) = mean_and_se(&diffs);
            paired[a][b] = PairedDifference { mean, std_error };
        }
    }

    let mut ranking: Vec<usize> = (0..k).collect();
    ranking.sort_by(|&a, &b| stats[b].mean_log_growth.total_cmp(&stats[a].mean_log_growth));

    Ok(ArenaReport {
        labels: policies.iter().map(Policy::label).collect(),
        stats,
        win_rates,
        paired,
        ranking,
        bankruptcies,
        per_seed: by_policy,
    })
}

fn run_scenario(policies: &[Policy], market: &MarketSpec, seed: Seed) -> Result<Vec<(PathMetrics, bool)>> {
    match *market {
        MarketSpec::Discrete { game, rounds } => policies
            .iter()
            .map(|p| {
                let path = backtest_discrete(p, game, rounds, seed)?;
                Ok((PathMetrics::from_log_wealth(&path), false))
            })
            .collect(),
        _ => {
            let context = market.continuous().expect("continuous market");
            let (price, lambda) = market.simulate(seed)?;
            policies
                .iter()
                .map(|p| {
                    let bt = backtest_continuous(p, &price, lambda.as_ref(), &context)?;
                    Ok((PathMetrics::from_log_wealth(&bt.log_wealth), bt.is_bankrupt()))
                })
                .collect()
        }
    }
}
