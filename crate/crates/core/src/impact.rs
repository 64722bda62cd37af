//! Power-law price impact with a permanent part and an exponentially decaying
//! transient part.
//!
//! An order of signed size `q` moves the mid by `I = sign(q) (|q| / L)^gamma`.
//! A share `permanent_share` of `I` stays forever; the rest decays at rate
//! `decay`. Fills happen at the pre-trade mid plus half the order's own
//! impact.
//!
//! With `gamma = 1` and no decay impact is additive and the terminal mid does
//! not depend on the order of trades. Concave impact or decay breaks that, so
//! a buy followed by a sell leaves the market somewhere else than a sell
//! followed by a buy.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactParams {
    /// Liquidity scale `L`.
    pub depth: f64,
    /// Concavity `gamma` in `(0, 1]`.
    pub exponent: f64,
    /// Decay rate of the transient part per unit time.
    pub decay: f64,
    pub permanent_share: f64,
}

impl ImpactParams {
    pub fn new(depth: f64, exponent: f64, decay: f64, permanent_share: f64) -> Result<Self> {
        let p = ImpactParams {
            depth,
            exponent,
            decay,
            permanent_share,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("depth", self.depth)?;
        if !(self.exponent > 0.0 && self.exponent <= 1.0) {
            return Err(Error::invalid("exponent", format!("{} not in (0, 1]", self.exponent)));
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(Error::invalid("decay", "must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&self.permanent_share) {
            return Err(Error::invalid("permanent_share", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Signed impact of an order.
    pub fn impact(&self, side: Side, size: f64) -> f64 {
        side.sign() * (size / self.depth).powf(self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Buy => 1.0,
            Side::Sell => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Order {
    pub side: Side,
    pub size: f64,
    /// Time of the order relative to the start of its sequence.
    pub time: f64,
}

impl Order {
    pub fn new(side: Side, size: f64, time: f64) -> Result<Self> {
        let order = Order { side, size, time };
        order.validate()?;
        Ok(order)
    }

    pub fn buy(size: f64, time: f64) -> Result<Self> {
        Self::new(Side::Buy, size, time)
    }

    pub fn sell(size: f64, time: f64) -> Result<Self> {
        Self::new(Side::Sell, size, time)
    }

    fn validate(&self) -> Result<()> {
        check_positive("size", self.size)?;
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(Error::invalid("time", "must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn signed_size(&self) -> f64 {
        self.side.sign() * self.size
    }
}

/// Market and trader state. The mid price is always
/// `base + permanent + transient`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketState {
    pub base: f64,
    pub permanent: f64,
    pub transient: f64,
    pub cash: f64,
    pub inventory: f64,
    /// Time of the last event.
    pub clock: f64,
}

impl MarketState {
    pub fn new(mid: f64) -> Self {
        MarketState {
            base: mid,
            permanent: 0.0,
            transient: 0.0,
            cash: 0.0,
            inventory: 0.0,
            clock: 0.0,
        }
    }

    pub fn mid_price(&self) -> f64 {
        self.base + self.permanent + self.transient
    }

    /// Transient part after letting `elapsed` time pass.
    pub fn decayed(&self, elapsed: f64, decay: f64) -> MarketState {
        MarketState {
            transient: self.transient * (-decay * elapsed).exp(),
            clock: self.clock + elapsed,
            ..*self
        }
    }
}

/// Executes `order` at absolute time `at`.
fn execute(state: &MarketState, side: Side, size: f64, at: f64, params: &ImpactParams) -> Result<MarketState> {
    if at < state.clock {
        return Err(Error::invalid(
            "time",
            format!("order at {at} precedes last event at {}", state.clock),
        ));
    }
    let mut next = state.decayed(at - state.clock, params.decay);
    let impact = params.impact(side, size);
    let fill = next.mid_price() + 0.5 * impact;
    next.cash -= side.sign() * size * fill;
    next.inventory += side.sign() * size;
    next.permanent += params.permanent_share * impact;
    next.transient += (1.0 - params.permanent_share) * impact;
    Ok(next)
}

/// Applies one order whose `time` is absolute.
pub fn apply_order(state: &MarketState, order: &Order, params: &ImpactParams) -> Result<MarketState> {
    params.validate()?;
    order.validate()?;
    execute(state, order.side, order.size, order.time, params)
}

/// Runs a sequence whose times are relative to `state.clock`.
pub fn run_sequence(state: &MarketState, orders: &[Order], params: &ImpactParams) -> Result<MarketState> {
    params.validate()?;
    let start = state.clock;
    let mut s = *state;
    for order in orders {
        order.validate()?;
        s = execute(&s, order.side, order.size, start + order.time, params)?;
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Commutator {
    /// Terminal mid of A-then-B minus that of B-then-A.
    pub price_gap: f64,
    pub cash_gap: f64,
}

/// Runs A then B and B then A from `initial`. The second sequence starts at
/// the time the first one ended.
pub fn commutator(seq_a: &[Order], seq_b: &[Order], params: &ImpactParams, initial: &MarketState) -> Result<Commutator> {
    let ab = run_sequence(&run_sequence(initial, seq_a, params)?, seq_b, params)?;
    let ba = run_sequence(&run_sequence(initial, seq_b, params)?, seq_a, params)?;
    Ok(Commutator {
        price_gap: ab.mid_price() - ba.mid_price(),
        cash_gap: ab.cash - ba.cash,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub net_cash_per_round: Vec<f64>,
    pub mean_net_cash: f64,
    /// Whether the cycle extracts cash on average.
    pub engine_runs: bool,
    pub final_inventory: f64,
}

/// Two pools of one asset: the permanent component is shared, transients are
/// per venue.
#[derive(Debug, Clone, Copy)]
struct TwoVenues {
    base: f64,
    permanent: f64,
    transient_hot: f64,
    transient_cold: f64,
    cash: f64,
    inventory: f64,
}

impl TwoVenues {
    fn trade(&mut self, hot: bool, side: Side, size: f64, params: &ImpactParams) {
        let transient = if hot { &mut self.transient_hot } else { &mut self.transient_cold };
        let impact = params.impact(side, size);
        let fill = self.base + self.permanent + *transient + 0.5 * impact;
        *transient += (1.0 - params.permanent_share) * impact;
        self.permanent += params.permanent_share * impact;
        self.cash -= side.sign() * size * fill;
        self.inventory += side.sign() * size;
    }

    fn rest(&mut self, elapsed: f64, hot: &ImpactParams, cold: &ImpactParams) {
        self.transient_hot *= (-hot.decay * elapsed).exp();
        self.transient_cold *= (-cold.decay * elapsed).exp();
    }
}

/// Cycles inventory between a deep (cold) and a shallow (hot) venue.
///
/// Each round buys `size` on the cold venue and sells it on the hot one,
/// rests for `rest`, then sells on the cold venue and buys back on the hot
/// one, and rests again. Inventory is flat after every round, so the net
/// cash of a round is its profit.
pub fn two_venue_cycle(
    params_hot: &ImpactParams,
    params_cold: &ImpactParams,
    size: f64,
    rounds: usize,
    rest: f64,
) -> Result<CycleReport> {
    params_hot.validate()?;
    params_cold.validate()?;
    check_positive("size", size)?;
    check_finite("rest", rest)?;
    if rest < 0.0 {
        return Err(Error::invalid("rest", "must be non-negative"));
    }
    if rounds == 0 {
        return Err(Error::invalid("rounds", "must be at least 1"));
    }
    let mut v = TwoVenues {
        base: 0.0,
        permanent: 0.0,
        transient_hot: 0.0,
        transient_cold: 0.0,
        cash: 0.0,
        inventory: 0.0,
    };
    let mut per_round = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let before = v.cash;
        v.trade(false, Side::Buy, size, params_cold);
        v.trade(true, Side::Sell, size, params_hot);
        v.rest(rest, params_hot, params_cold);
        v.trade(false, Side::Sell, size, params_cold);
        v.trade(true, Side::Buy, size, params_hot);
        v.rest(rest, params_hot, params_cold);
        per_round.push(v.cash - before);
    }
    let mean = per_round.iter().sum::<f64>() / rounds as f64;
    Ok(CycleReport {
        net_cash_per_round: per_round,
        mean_net_cash: mean,
        engine_runs: mean > 0.0,
        final_inventory: v.inventory,
    })
}
