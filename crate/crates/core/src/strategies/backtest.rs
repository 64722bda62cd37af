use crate::discrete_kelly::{kelly_multi_paper, kelly_single, optimize_fraction, play_round, round_multiplier, GameSpec, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::path::Path;
use crate::rng::Seed;

use super::{ContinuousMarket, MarketSpec, MultiGameSource, Policy};

/// Wealth level a bankrupt continuous backtest is held at.
pub const BANKRUPTCY_FLOOR: f64 = 1e-12;

/// How a discrete policy spreads its stake.
#[derive(Debug, Clone, Copy)]
enum Bet {
    FirstGame(f64),
    EqualSplit(f64),
}

fn discrete_bet(policy: &Policy, game: GameSpec) -> Result<Bet> {
    let incompatible = || Error::IncompatiblePolicy {
        policy: policy.label(),
        market: "discrete games".into(),
    };
    match *policy {
        Policy::FixedFraction { fraction } => {
            if !(0.0..1.0).contains(&fraction) {
                return Err(Error::invalid(
                    "fraction",
                    format!("{fraction} not in [0, 1) for a long-only game"),
                ));
            }
            Ok(Bet::EqualSplit(fraction))
        }
        Policy::SingleGameKelly => Ok(Bet::FirstGame(single_fraction(game.p))),
        Policy::MultiGameKelly { source } => {
            // one game is the single-game problem; sharing the formula keeps
            // the two policies bit-identical there
            if game.n_games == 1 || game.p <= 0.5 {
                return Ok(Bet::FirstGame(single_fraction(game.p)));
            }
            if game.p >= 1.0 {
                return Err(Error::invalid("p", "Kelly fractions need p < 1"));
            }
            let f = match source {
                MultiGameSource::PaperFormula => kelly_multi_paper(game.p, game.n_games)?,
                MultiGameSource::NumericOptimum => optimize_fraction(game.p, game.n_games, DEFAULT_TOL)?,
            };
            Ok(Bet::EqualSplit(f.min(1.0 - 1e-12)))
        }
        _ => Err(incompatible()),
    }
}

fn single_fraction(p: f64) -> f64 {
    if p >= 1.0 {
        1.0 - 1e-12
    } else {
        kelly_single(p).expect("p validated by GameSpec")
    }
}

/// Log-wealth path of a discrete policy over `rounds` rounds.
///
/// The game outcomes depend only on `seed`, so every policy run with the same
/// seed faces the same realized games.
pub fn backtest_discrete(policy: &Policy, game: GameSpec, rounds: u64, seed: Seed) -> Result<Path> {
    policy.validate()?;
    let game = GameSpec::new(game.p, game.n_games)?;
    let bet = discrete_bet(policy, game)?;
    let mut rng = seed.rng();
    let mut log_wealth = Vec::with_capacity(rounds as usize + 1);
    let mut lw = 0.0;
    log_wealth.push(lw);
    for _ in 0..rounds {
        let outcome = play_round(&mut rng, game);
        let multiplier = match bet {
            Bet::FirstGame(f) => round_multiplier(f, u32::from(outcome.first_won), 1),
            Bet::EqualSplit(f) => round_multiplier(f, outcome.wins, game.n_games),
        };
        lw += multiplier.ln();
        log_wealth.push(lw);
    }
    Path::indexed(log_wealth)
}

/// Rejects policies that cannot trade in `market`, before any path is drawn.
pub fn check_compatible(policy: &Policy, market: &MarketSpec) -> Result<()> {
    policy.validate()?;
    match *market {
        MarketSpec::Discrete { game, .. } => discrete_bet(policy, GameSpec::new(game.p, game.n_games)?).map(|_| ()),
        _ => check_continuous(policy, &market.continuous().expect("continuous market")),
    }
}

fn check_continuous(policy: &Policy, market: &ContinuousMarket) -> Result<()> {
    policy.validate()?;
    let ok = match (policy, market) {
        (Policy::SingleGameKelly | Policy::MultiGameKelly { .. }, _) => false,
        (Policy::DynamicKellyOu | Policy::StaticKellyOu, m) => matches!(m, ContinuousMarket::StochasticDrift { .. }),
        (Policy::TrendReversion { .. }, m) => matches!(m, ContinuousMarket::TrendOu { .. }),
        (Policy::RollingDriftKelly { .. }, m) => !matches!(m, ContinuousMarket::TrendOu { .. }),
        (Policy::FixedFraction { .. } | Policy::BuyAndHold, _) => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::IncompatiblePolicy {
            policy: policy.label(),
            market: market.name().into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousBacktest {
    /// `ln W_t` with `W_0 = 1`.
    pub log_wealth: Path,
    /// Fraction held over each step; one shorter than the path.
    pub fractions: Vec<f64>,
    /// Time at which wealth would have gone non-positive, if it did.
    pub bankruptcy_time: Option<f64>,
}

impl ContinuousBacktest {
    pub fn is_bankrupt(&self) -> bool {
        self.bankruptcy_time.is_some()
    }
}

/// Self-financing backtest rebalanced at every grid step:
/// `W' = W (1 + f (S'/S - 1) + (1 - f) r dt)`.
///
/// A step that would take wealth to zero or below marks bankruptcy and
/// holds wealth at [`BANKRUPTCY_FLOOR`] from then on.
pub fn backtest_continuous(
    policy: &Policy,
    price: &Path,
    lambda: Option<&Path>,
    market: &ContinuousMarket,
) -> Result<ContinuousBacktest> {
    check_continuous(policy, market)?;
    if let Some(lambda) = lambda {
        if !lambda.same_grid(price) {
            return Err(Error::GridMismatch("price and lambda paths differ".into()));
        }
    }
    let prices = price.values();
    if let Some(index) = prices.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::NonPositivePrice {
            index,
            value: prices[index],
        });
    }
    let times = price.times();
    let rate = market.rate();
    let sigma = market.sigma();

    let lambda_values = match (policy, lambda) {
        (Policy::DynamicKellyOu, Some(l)) => Some(l.values()),
        (Policy::DynamicKellyOu, None) => {
            return Err(Error::invalid("lambda", "dynamic Kelly needs the observed lambda path"))
        }
        _ => None,
    };
    let lambda_hat = match market {
        ContinuousMarket::StochasticDrift { params } => params.lambda_hat,
        _ => 0.0,
    };
    let trend = match market {
        ContinuousMarket::TrendOu { params, .. } => Some(*params),
        _ => None,
    };

    let n = prices.len();
    let mut log_wealth = Vec::with_capacity(n);
    let mut fractions = Vec::with_capacity(n.saturating_sub(1));
    let mut lw = 0.0;
    let mut bankruptcy_time = None;
    log_wealth.push(lw);
    for i in 0..n - 1 {
        let (t, s) = (times[i], prices[i]);
        let f = match *policy {
            Policy::FixedFraction { fraction } => fraction,
            Policy::BuyAndHold => 1.0,
            Policy::DynamicKellyOu => lambda_values.expect("checked above")[i] / sigma,
            Policy::StaticKellyOu => lambda_hat / sigma,
            Policy::TrendReversion { leverage_cap } => {
                let params = trend.expect("checked above");
                // shares N = W (a - r S) / sigma^2 for the arithmetic drift a,
                // so the wealth fraction N S / W scales with the price level
                let f = (params.drift(s, t) - rate * s) * s / (sigma * sigma);
                f.clamp(-leverage_cap, leverage_cap)
            }
            Policy::RollingDriftKelly {
                window,
                leverage_cap,
            } => {
                if i == 0 {
                    0.0
                } else {
                    let start = i.saturating_sub(window);
                    let mean_log_return = (s / prices[start]).ln() / (t - times[start]);
                    let drift = mean_log_return + 0.5 * sigma * sigma;
                    ((drift - rate) / (sigma * sigma)).clamp(-leverage_cap, leverage_cap)
                }
            }
            Policy::SingleGameKelly | Policy::MultiGameKelly { .. } => unreachable!(),
        };
        fractions.push(f);
        if bankruptcy_time.is_none() {
            let dt = times[i + 1] - t;
            let growth = 1.0 + f * (prices[i + 1] / s - 1.0) + (1.0 - f) * rate * dt;
            if growth > 0.0 && (lw + growth.ln()) > BANKRUPTCY_FLOOR.ln() {
                lw += growth.ln();
            } else {
                bankruptcy_time = Some(times[i + 1]);
                lw = BANKRUPTCY_FLOOR.ln();
            }
        }
        log_wealth.push(lw);
    }
    Ok(ContinuousBacktest {
        log_wealth: Path::from_parts_unchecked(times.to_vec(), log_wealth),
        fractions,
        bankruptcy_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use crate::sde_models::{simulate_gbm, simulate_stochastic_drift, GridSpec, StochasticDriftParams};

    #[test]
    fn zero_fraction_is_flat() {
        let game = GameSpec::new(0.6, 3).unwrap();
        let path = backtest_discrete(&Policy::FixedFraction { fraction: 0.0 }, game, 1000, Seed::new(1)).unwrap();
        assert!(path.values().iter().all(|&lw| lw == 0.0));
    }

    #[test]
    fn one_game_single_and_multi_identical() {
        let game = GameSpec::new(0.6, 1).unwrap();
        let seed = Seed::new(8);
        let single = backtest_discrete(&Policy::SingleGameKelly, game, 10_000, seed).unwrap();
        for source in [MultiGameSource::NumericOptimum, MultiGameSource::PaperFormula] {
            let multi = backtest_discrete(&Policy::MultiGameKelly { source }, game, 10_000, seed).unwrap();
            assert_eq!(single, multi);
        }
    }

    #[test]
    fn continuous_policies_rejected_on_games() {
        let game = GameSpec::new(0.6, 2).unwrap();
        for policy in [Policy::DynamicKellyOu, Policy::BuyAndHold, Policy::TrendReversion { leverage_cap: 1.0 }] {
            assert!(matches!(
                backtest_discrete(&policy, game, 10, Seed::new(0)),
                Err(Error::IncompatiblePolicy { .. })
            ));
        }
    }

    fn gbm_market() -> (Path, ContinuousMarket) {
        let grid = GridSpec::new(2.0, 500).unwrap();
        let price = simulate_gbm(0.08, 0.3, 50.0, grid, Seed::new(3)).unwrap();
        (price, ContinuousMarket::Gbm { mu: 0.08, sigma: 0.3, rate: 0.03 })
    }

    #[test]
    fn cash_only_earns_money_market() {
        let (price, market) = gbm_market();
        let bt = backtest_continuous(&Policy::FixedFraction { fraction: 0.0 }, &price, None, &market).unwrap();
        let lw = bt.log_wealth.values();
        let dt = price.times()[1] - price.times()[0];
        for w in lw.windows(2) {
            assert!(((w[1] - w[0]).exp() - (1.0 + 0.03 * dt)).abs() < 1e-13);
        }
    }

    #[test]
    fn full_investment_tracks_price() {
        let (price, market) = gbm_market();
        let bt = backtest_continuous(&Policy::BuyAndHold, &price, None, &market).unwrap();
        for (&lw, &s) in bt.log_wealth.values().iter().zip(price.values()) {
            assert!((lw.exp() - s / price.first()).abs() < 1e-12 * s / price.first());
        }
    }

    #[test]
    fn bankruptcy_is_floored_and_flagged() {
        let price = Path::indexed(vec![1.0, 1.1, 0.5, 0.6]).unwrap();
        let market = ContinuousMarket::Gbm { mu: 0.0, sigma: 0.2, rate: 0.0 };
        let bt = backtest_continuous(&Policy::FixedFraction { fraction: 3.0 }, &price, None, &market).unwrap();
        assert_eq!(bt.bankruptcy_time, Some(2.0));
        assert_eq!(bt.log_wealth.last(), BANKRUPTCY_FLOOR.ln());
    }

    #[test]
    fn dynamic_equals_static_without_lambda_noise() {
        let params = StochasticDriftParams {
            r: 0.01,
            sigma: 0.2,
            kappa: 1.0,
            lambda_hat: 0.3,
            sigma_hat: 0.0,
            lambda0: 0.3,
            s0: 1.0,
        };
        let (price, lambda) = simulate_stochastic_drift(&params, GridSpec::new(5.0, 1000).unwrap(), Seed::new(6)).unwrap();
        let market = ContinuousMarket::StochasticDrift { params };
        let dynamic = backtest_continuous(&Policy::DynamicKellyOu, &price, Some(&lambda), &market).unwrap();
        let fixed = backtest_continuous(&Policy::StaticKellyOu, &price, Some(&lambda), &market).unwrap();
        assert_eq!(dynamic, fixed);
    }

    #[test]
    fn compatibility_errors() {
        let (price, market) = gbm_market();
        assert!(backtest_continuous(&Policy::DynamicKellyOu, &price, None, &market).is_err());
        assert!(backtest_continuous(&Policy::StaticKellyOu, &price, None, &market).is_err());
        assert!(backtest_continuous(&Policy::TrendReversion { leverage_cap: 1.0 }, &price, None, &market).is_err());
        assert!(backtest_continuous(&Policy::SingleGameKelly, &price, None, &market).is_err());
        let other = Path::indexed(vec![0.0; price.len()]).unwrap();
        assert!(matches!(
            backtest_continuous(&Policy::BuyAndHold, &price, Some(&other), &market),
            Err(Error::GridMismatch(_))
        ));
    }
}
