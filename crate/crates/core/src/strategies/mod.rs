//! Investor policies, backtests and the common-random-number arena.
//!
//! Discrete policies bet on the double-or-nothing games of
//! [`crate::discrete_kelly`]; continuous policies hold a wealth fraction in a
//! simulated risky asset and rebalance every grid step. Wealth is tracked as
//! `ln W_t` throughout.

mod arena;
mod backtest;

use serde::{Deserialize, Serialize};

use crate::discrete_kelly::GameSpec;
use crate::error::{Error, Result};
use crate::path::Path;
use crate::rng::Seed;
use crate::sde_models::{
    simulate_gbm, simulate_stochastic_drift, simulate_trend_ou, GridSpec, StochasticDriftParams,
    TrendOUParams,
};

pub use arena::{arena, ArenaReport, PairedDifference};
pub use backtest::{
    backtest_continuous, backtest_discrete, check_compatible, ContinuousBacktest, BANKRUPTCY_FLOOR,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiGameSource {
    /// `(p^n - q^n) / (p^n + q^n)`.
    PaperFormula,
    /// Maximizer of the exact expected log growth.
    NumericOptimum,
}

/// An investor's sizing rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", from = "PolicyRepr")]
pub enum Policy {
    /// Constant fraction of wealth at risk. On the discrete games it is split
    /// equally over every game.
    FixedFraction { fraction: f64 },
    /// Bets `2p - 1` on the first game and ignores the rest: the local
    /// optimizer.
    SingleGameKelly,
    /// Bets the diversified fraction split equally over all games.
    MultiGameKelly { source: MultiGameSource },
    /// `lambda_t / sigma`, using the current market price of risk.
    DynamicKellyOu,
    /// `lambda_hat / sigma`, using only the long-run mean.
    StaticKellyOu,
    /// Fully invested, never exits.
    BuyAndHold,
    /// Kelly fraction for the trending OU price level, clamped to
    /// `[-leverage_cap, leverage_cap]`.
    TrendReversion { leverage_cap: f64 },
    /// `lambda` estimated from the trailing `window` log returns instead of
    /// observed, clamped to `[-leverage_cap, leverage_cap]`.
    RollingDriftKelly { window: usize, leverage_cap: f64 },
}

// Serde ignores stray fields on unit variants of an internally tagged enum,
// so parse through empty struct variants to keep unknown keys an error.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum PolicyRepr {
    FixedFraction { fraction: f64 },
    SingleGameKelly {},
    MultiGameKelly { source: MultiGameSource },
    DynamicKellyOu {},
    StaticKellyOu {},
    BuyAndHold {},
    TrendReversion { leverage_cap: f64 },
    RollingDriftKelly { window: usize, leverage_cap: f64 },
}

impl From<PolicyRepr> for Policy {
    fn from(r: PolicyRepr) -> Self {
        match r {
            PolicyRepr::FixedFraction { fraction } => Policy::FixedFraction { fraction },
            PolicyRepr::SingleGameKelly {} => Policy::SingleGameKelly,
            PolicyRepr::MultiGameKelly { source } => Policy::MultiGameKelly { source },
            PolicyRepr::DynamicKellyOu {} => Policy::DynamicKellyOu,
            PolicyRepr::StaticKellyOu {} => Policy::StaticKellyOu,
            PolicyRepr::BuyAndHold {} => Policy::BuyAndHold,
            PolicyRepr::TrendReversion { leverage_cap } => Policy::TrendReversion { leverage_cap },
            PolicyRepr::RollingDriftKelly {
                window,
                leverage_cap,
            } => Policy::RollingDriftKelly {
                window,
                leverage_cap,
            },
        }
    }
}

impl Policy {
    pub fn label(&self) -> String {
        match self {
            Policy::FixedFraction { fraction } => format!("fixed-fraction({fraction})"),
            Policy::SingleGameKelly => "single-game-kelly".into(),
            Policy::MultiGameKelly { source } => match source {
                MultiGameSource::PaperFormula => "multi-game-kelly(paper-formula)".into(),
                MultiGameSource::NumericOptimum => "multi-game-kelly(numeric-optimum)".into(),
            },
            Policy::DynamicKellyOu => "dynamic-kelly-ou".into(),
            Policy::StaticKellyOu => "static-kelly-ou".into(),
            Policy::BuyAndHold => "buy-and-hold".into(),
            Policy::TrendReversion { leverage_cap } => format!("trend-reversion(cap={leverage_cap})"),
            Policy::RollingDriftKelly {
                window,
                leverage_cap,
            } => format!("rolling-drift-kelly(window={window},cap={leverage_cap})"),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            Policy::FixedFraction { .. } | Policy::SingleGameKelly | Policy::MultiGameKelly { .. }
        )
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, Policy::SingleGameKelly | Policy::MultiGameKelly { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Policy::FixedFraction { fraction } if !fraction.is_finite() => {
                Err(Error::invalid("fraction", "must be finite"))
            }
            Policy::TrendReversion { leverage_cap } | Policy::RollingDriftKelly { leverage_cap, .. }
                if !(leverage_cap >= 0.0 && leverage_cap.is_finite()) =>
            {
                Err(Error::invalid("leverage_cap", "must be finite and non-negative"))
            }
            Policy::RollingDriftKelly { window: 0, .. } => {
                Err(Error::invalid("window", "must be at least 1"))
            }
            _ => Ok(()),
        }
    }
}

/// Parameters a continuous policy may consult while trading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ContinuousMarket {
    StochasticDrift { params: StochasticDriftParams },
    TrendOu { params: TrendOUParams, rate: f64 },
    Gbm { mu: f64, sigma: f64, rate: f64 },
}

impl ContinuousMarket {
    pub fn rate(&self) -> f64 {
        match *self {
            ContinuousMarket::StochasticDrift { params } => params.r,
            ContinuousMarket::TrendOu { rate, .. } | ContinuousMarket::Gbm { rate, .. } => rate,
        }
    }

    /// Volatility of the risky asset; for the trending OU model this is the
    /// arithmetic (price-level) volatility.
    pub fn sigma(&self) -> f64 {
        match *self {
            ContinuousMarket::StochasticDrift { params } => params.sigma,
            ContinuousMarket::TrendOu { params, .. } => params.sigma,
            ContinuousMarket::Gbm { sigma, .. } => sigma,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ContinuousMarket::StochasticDrift { .. } => "stochastic-drift market",
            ContinuousMarket::TrendOu { .. } => "trending-OU market",
            ContinuousMarket::Gbm { .. } => "GBM market",
        }
    }
}

/// A market an arena can generate paths for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MarketSpec {
    Discrete {
        game: GameSpec,
        rounds: u64,
    },
    StochasticDrift {
        params: StochasticDriftParams,
        grid: GridSpec,
    },
    TrendOu {
        params: TrendOUParams,
        rate: f64,
        grid: GridSpec,
    },
    Gbm {
        mu: f64,
        sigma: f64,
        rate: f64,
        s0: f64,
        grid: GridSpec,
    },
}

impl MarketSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MarketSpec::Discrete { .. } => "discrete games",
            MarketSpec::StochasticDrift { .. } => "stochastic-drift market",
            MarketSpec::TrendOu { .. } => "trending-OU market",
            MarketSpec::Gbm { .. } => "GBM market",
        }
    }

    pub fn continuous(&self) -> Option<ContinuousMarket> {
        match *self {
            MarketSpec::Discrete { .. } => None,
            MarketSpec::StochasticDrift { params, .. } => {
                Some(ContinuousMarket::StochasticDrift { params })
            }
            MarketSpec::TrendOu { params, rate, .. } => Some(ContinuousMarket::TrendOu { params, rate }),
            MarketSpec::Gbm {
                mu, sigma, rate, ..
            } => Some(ContinuousMarket::Gbm { mu, sigma, rate }),
        }
    }

    /// Price path, and the `lambda` path when the model has one.
    pub fn simulate(&self, seed: Seed) -> Result<(Path, Option<Path>)> {
        match *self {
            MarketSpec::Discrete { .. } => Err(Error::invalid(
                "market",
                "discrete games have no price path",
            )),
            MarketSpec::StochasticDrift { params, grid } => {
                let (price, lambda) = simulate_stochastic_drift(&params, grid, seed)?;
                Ok((price, Some(lambda)))
            }
            MarketSpec::TrendOu { params, grid, .. } => Ok((simulate_trend_ou(&params, grid, seed)?, None)),
            MarketSpec::Gbm {
                mu, sigma, s0, grid, ..
            } => Ok((simulate_gbm(mu, sigma, s0, grid, seed)?, None)),
        }
    }
}
