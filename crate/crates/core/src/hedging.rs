//! Discrete delta hedging of a European option bought at a mispriced
//! volatility.
//!
//! A hedger long an option valued at implied vol `sigma_i` and delta-hedged at
//! that vol earns, per unit time, `1/2 Gamma S^2 (sigma_r^2 - sigma_i^2)` when
//! the underlying actually realizes `sigma_r`. Gamma here is the ordinary
//! Black-Scholes gamma; `Gamma S^2` is the dollar gamma that makes the accrual
//! a P&L rate.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{check_finite, check_positive, Error, Result};
use crate::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptionKind {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionSpec {
    pub strike: f64,
    pub maturity: f64,
    pub kind: OptionKind,
}

impl OptionSpec {
    pub fn new(strike: f64, maturity: f64, kind: OptionKind) -> Result<Self> {
        let spec = OptionSpec {
            strike,
            maturity,
            kind,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("strike", self.strike)?;
        check_positive("maturity", self.maturity)
    }

    pub fn payoff(&self, spot: f64) -> f64 {
        match self.kind {
            OptionKind::Call => (spot - self.strike).max(0.0),
            OptionKind::Put => (self.strike - spot).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HedgeConfig {
    pub implied_vol: f64,
    pub realized_vol: f64,
    pub rate: f64,
    pub rehedge_steps: usize,
}

impl HedgeConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("implied_vol", self.implied_vol)?;
        check_positive("realized_vol", self.realized_vol)?;
        check_finite("rate", self.rate)?;
        if self.rehedge_steps == 0 {
            return Err(Error::invalid("rehedge_steps", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Greeks {
    pub value: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// Black-Scholes value, delta and gamma at time `t`.
///
/// At or after maturity the option is worth its intrinsic value, delta is
/// `1` / `-1` strictly in the money and `0` otherwise, and gamma is `0`.
pub fn bs_value_delta_gamma(spot: f64, spec: &OptionSpec, vol: f64, rate: f64, t: f64) -> Greeks {
    let tau = spec.maturity - t;
    if tau <= 0.0 {
        let delta = match spec.kind {
            OptionKind::Call if spot > spec.strike => 1.0,
            OptionKind::Put if spot < spec.strike => -1.0,
            _ => 0.0,
        };
        return Greeks {
            value: spec.payoff(spot),
            delta,
            gamma: 0.0,
        };
    }
    let n = Normal::standard();
    let sd = vol * tau.sqrt();
    let d1 = ((spot / spec.strike).ln() + (rate + 0.5 * vol * vol) * tau) / sd;
    let d2 = d1 - sd;
    let discount = (-rate * tau).exp();
    let gamma = n.pdf(d1) / (spot * sd);
    match spec.kind {
        OptionKind::Call => Greeks {
            value: spot * n.cdf(d1) - spec.strike * discount * n.cdf(d2),
            delta: n.cdf(d1),
            gamma,
        },
        OptionKind::Put => Greeks {
            value: spec.strike * discount * n.cdf(-d2) - spot * n.cdf(-d1),
            delta: n.cdf(d1) - 1.0,
            gamma,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeReport {
    /// Terminal value of option plus hedge, net of the premium financed at `r`.
    pub realized_pnl: f64,
    /// `sum 1/2 Gamma_t S_t^2 (sigma_r^2 - sigma_i^2) dt`, each term carried
    /// to maturity at `r`.
    pub predicted_accrual: f64,
    /// `realized_pnl - predicted_accrual`.
    pub gap: f64,
    pub hedge_times: Vec<f64>,
    pub spots: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Shares held short against the option over each interval.
    pub hedge_positions: Vec<f64>,
}

/// Hedges a long option along `path`, rebalancing `config.rehedge_steps`
/// times.
///
/// The path must run from time 0 to the option's maturity on a grid whose
/// step count is a multiple of `rehedge_steps`; the hedge is rebalanced on
/// every `(len - 1) / rehedge_steps`-th point.
pub fn delta_hedge_pnl(path: &Path, spec: &OptionSpec, config: &HedgeConfig) -> Result<HedgeReport> {
    spec.validate()?;
    config.validate()?;
    let times = path.times();
    let spots = path.values();
    let t_end = times[times.len() - 1];
    if times[0].abs() > 1e-12 || (t_end - spec.maturity).abs() > 1e-9 * spec.maturity.max(1.0) {
        return Err(Error::GridMismatch(format!(
            "path covers [{}, {t_end}], option matures at {}",
            times[0], spec.maturity
        )));
    }
    let steps = times.len() - 1;
    if !steps.is_multiple_of(config.rehedge_steps) {
        return Err(Error::GridMismatch(format!(
            "{steps} path steps not divisible into {} rehedges",
            config.rehedge_steps
        )));
    }
    if let Some(index) = spots.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::NonPositivePrice {
            index,
            value: spots[index],
        });
    }
    let stride = steps / config.rehedge_steps;
    let (vol, rate) = (config.implied_vol, config.rate);
    let var_gap = config.realized_vol.powi(2) - vol * vol;

    let n = config.rehedge_steps;
    let mut hedge_times = Vec::with_capacity(n);
    let mut hedge_spots = Vec::with_capacity(n);
    let mut gammas = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);

    let start = bs_value_delta_gamma(spots[0], spec, vol, rate, 0.0);
    let premium = start.value;
    // short delta shares; the proceeds sit in the cash account
    let mut cash = start.delta * spots[0];
    let mut delta = start.delta;
    let mut predicted = 0.0;
    let mut gamma = start.gamma;
    for i in 0..n {
        let (t0, s0) = (times[i * stride], spots[i * stride]);
        let (t1, s1) = (times[(i + 1) * stride], spots[(i + 1) * stride]);
        hedge_times.push(t0);
        hedge_spots.push(s0);
        gammas.push(gamma);
        positions.push(delta);
        let dt = t1 - t0;
        predicted += 0.5 * gamma * s0 * s0 * var_gap * dt * (rate * (t_end - t0)).exp();
        cash *= (rate * dt).exp();
        if i + 1 < n {
            let g = bs_value_delta_gamma(s1, spec, vol, rate, t1);
            cash += (g.delta - delta) * s1;
            delta = g.delta;
            gamma = g.gamma;
        }
    }
    let s_end = spots[steps];
    let realized_pnl = spec.payoff(s_end) - delta * s_end + cash - premium * (rate * t_end).exp();
    Ok(HedgeReport {
        realized_pnl,
        predicted_accrual: predicted,
        gap: realized_pnl - predicted,
        hedge_times,
        spots: hedge_spots,
        gammas,
        hedge_positions: positions,
    })
}
