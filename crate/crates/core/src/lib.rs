//! Simulation and optimization toolkit for studying myopic investors.
//!
//! The crate is organised around a handful of experiments:
//!
//! * [`discrete_kelly`]: Kelly fractions for one or many simultaneous
//!   double-or-nothing games, closed form and numeric.
//! * [`lottery`]: shared-jackpot lotteries and the contrarian edge.
//! * [`sde_models`]: exact simulators for the stochastic-drift model, the
//!   trending Ornstein-Uhlenbeck process and plain GBM.
//! * [`strategies`]: investor policies, backtests and a common-random-number
//!   arena.
//! * [`hedging`]: discrete delta hedging and the gamma accrual of a
//!   volatility mispricing.
//! * [`impact`]: a power-law impact model with transient decay, used to show
//!   that order flow does not commute.
//!
//! Everything random is driven by a [`Seed`]; results are a pure function of
//! the configuration and the master seed regardless of thread count.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrete_kelly;
pub mod error;
pub mod hedging;
pub mod impact;
pub mod lottery;
pub mod path;
pub mod rng;
pub mod sde_models;
pub mod stats;
pub mod strategies;

pub use discrete_kelly::{Allocation, GameSpec};
pub use error::{Error, Result};
pub use hedging::{Greeks, HedgeConfig, HedgeReport, OptionKind, OptionSpec};
pub use impact::{ImpactParams, MarketState, Order, Side};
pub use lottery::LotterySpec;
pub use path::Path;
pub use rng::{derive_stream, Seed};
pub use sde_models::{GridSpec, StochasticDriftParams, TrendOUParams};
pub use stats::{summarize, PathMetrics, SummaryStats};
pub use strategies::{ArenaReport, ContinuousMarket, MarketSpec, MultiGameSource, Policy};
