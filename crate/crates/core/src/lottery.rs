//! Fixed-jackpot lottery where winners split the prize.
//!
//! The crowd of `M` other players each pick a number independently from a
//! popularity distribution. If the modeled player's number `i` is drawn and
//! `m` others hold it too, the player receives `J / (m + 1)`. Popular numbers
//! win as often as unpopular ones but pay less, so the best ticket is the one
//! the crowd avoids.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_positive, Error, Result};
use crate::rng::Seed;
use crate::stats::mean_and_se;

const SUM_TOL: f64 = 1e-12;

/// Crowd sizes above this use the closed form instead of the binomial sum.
pub const CLOSED_FORM_THRESHOLD: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LotterySpec {
    popularity: Vec<f64>,
    draw_distribution: Vec<f64>,
    n_other_players: u64,
    jackpot: f64,
    ticket_price: f64,
}

impl LotterySpec {
    /// Spec with a uniform draw over the `popularity.len()` numbers.
    pub fn new(
        popularity: Vec<f64>,
        n_other_players: u64,
        jackpot: f64,
        ticket_price: f64,
    ) -> Result<Self> {
        let k = popularity.len();
        let draw = vec![1.0 / k.max(1) as f64; k];
        Self::with_draw(popularity, draw, n_other_players, jackpot, ticket_price)
    }

    pub fn with_draw(
        popularity: Vec<f64>,
        draw_distribution: Vec<f64>,
        n_other_players: u64,
        jackpot: f64,
        ticket_price: f64,
    ) -> Result<Self> {
        if popularity.is_empty() {
            return Err(Error::EmptyInput("lottery needs at least one number"));
        }
        if draw_distribution.len() != popularity.len() {
            return Err(Error::invalid(
                "draw_distribution",
                format!(
                    "{} entries for {} numbers",
                    draw_distribution.len(),
                    popularity.len()
                ),
            ));
        }
        check_distribution("popularity", &popularity)?;
        check_distribution("draw_distribution", &draw_distribution)?;
        check_positive("jackpot", jackpot)?;
        check_positive("ticket_price", ticket_price)?;
        Ok(LotterySpec {
            popularity,
            draw_distribution,
            n_other_players,
            jackpot,
            ticket_price,
        })
    }

    pub fn n_numbers(&self) -> usize {
        self.popularity.len()
    }

    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    pub fn draw_distribution(&self) -> &[f64] {
        &self.draw_distribution
    }

    pub fn n_other_players(&self) -> u64 {
        self.n_other_players
    }

    pub fn jackpot(&self) -> f64 {
        self.jackpot
    }

    pub fn ticket_price(&self) -> f64 {
        self.ticket_price
    }

    fn check_index(&self, number: usize) -> Result<()> {
        if number < self.n_numbers() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: number,
                len: self.n_numbers(),
            })
        }
    }
}

fn check_distribution(name: &'static str, probs: &[f64]) -> Result<()> {
    if probs.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid(name, "entries must be finite and non-negative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::invalid(name, format!("sums to {total}, not 1")));
    }
    Ok(())
}

/// `E[1 / (m + 1)]` for `m ~ Binomial(M, w)` by direct summation.
pub fn share_factor_sum(w: f64, m_players: u64) -> f64 {
    if w <= 0.0 {
        return 1.0;
    }
    if w >= 1.0 {
        return 1.0 / (m_players as f64 + 1.0);
    }
    let mf = m_players as f64;
    let (lw, lv) = (w.ln(), (-w).ln_1p());
    let ln_m_fact = ln_gamma(mf + 1.0);
    (0..=m_players)
        .map(|m| {
            let k = m as f64;
            let ln_weight = ln_m_fact - ln_gamma(k + 1.0) - ln_gamma(mf - k + 1.0) + k * lw + (mf - k) * lv;
            ln_weight.exp() / (k + 1.0)
        })
        .sum()
}

/// Closed form of [`share_factor_sum`]: `(1 - (1-w)^(M+1)) / ((M+1) w)`.
///
/// For `w < 1e-12` the leading terms of the series in `w` are used instead.
pub fn share_factor_closed(w: f64, m_players: u64) -> f64 {
    let m1 = m_players as f64 + 1.0;
    if w < 1e-12 {
        let mf = m_players as f64;
        // 1 - M w / 2 + M (M - 1) w^2 / 6
        return 1.0 - mf * w / 2.0 + mf * (mf - 1.0) * w * w / 6.0;
    }
    -(m1 * (-w).ln_1p()).exp_m1() / (m1 * w)
}

/// Exact expected payout of one ticket on `number` (gross of ticket price).
pub fn expected_ticket_value(spec: &LotterySpec, number: usize) -> Result<f64> {
    spec.check_index(number)?;
    let w = spec.popularity[number];
    let share = if spec.n_other_players > CLOSED_FORM_THRESHOLD {
        share_factor_closed(w, spec.n_other_players)
    } else {
        share_factor_sum(w, spec.n_other_players)
    };
    Ok(spec.draw_distribution[number] * spec.jackpot * share)
}

/// Number with the highest expected payout; ties go to the lowest index.
pub fn best_number(spec: &LotterySpec) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..spec.n_numbers() {
        let ev = expected_ticket_value(spec, i).expect("index in range");
        if ev > best.1 {
            best = (i, ev);
        }
    }
    best
}

/// Expected amount the house pays per draw to the `M` crowd players alone.
/// A drawn number nobody holds rolls over, so this never exceeds the jackpot.
pub fn expected_house_payout(spec: &LotterySpec) -> f64 {
    let m = spec.n_other_players as f64;
    spec.popularity
        .iter()
        .zip(&spec.draw_distribution)
        .map(|(&w, &d)| d * spec.jackpot * -(m * (-w).ln_1p()).exp_m1())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffRecord {
    pub number: usize,
    pub draws: u64,
    /// Mean of payout minus ticket price per draw.
    pub mean_net_payoff: f64,
    pub std_error: f64,
    /// Fraction of draws on which the ticket's number came up.
    pub hit_rate: f64,
}

/// Monte Carlo of repeatedly buying one ticket on `number`.
///
/// Each draw samples the winning number from the draw distribution; when it
/// is ours, the count of crowd players sharing it is sampled as
/// `Binomial(M, popularity[number])`, which is the law of independent crowd
/// picks restricted to that number.
pub fn simulate_lottery(spec: &LotterySpec, number: usize, draws: u64, seed: Seed) -> Result<PayoffRecord> {
    spec.check_index(number)?;
    if draws == 0 {
        return Err(Error::invalid("draws", "must be at least 1"));
    }
    let mut rng = seed.rng();
    let sharers = Binomial::new(spec.n_other_players, spec.popularity[number].clamp(0.0, 1.0))
        .map_err(|e| Error::invalid("popularity", e.to_string()))?;
    let cumulative: Vec<f64> = spec
        .draw_distribution
        .iter()
        .scan(0.0, |acc, &d| {
            *acc += d;
            Some(*acc)
        })
        .collect();

    let mut net = Vec::with_capacity(draws as usize);
    let mut hits = 0u64;
    for _ in 0..draws {
        let u: f64 = rng.random();
        let drawn = cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(cumulative.len() - 1);
        let payout = if drawn == number {
            hits += 1;
            let m = sharers.sample(&mut rng);
            spec.jackpot / (m as f64 + 1.0)
        } else {
            0.0
        };
        net.push(payout - spec.ticket_price);
    }
    let (mean, se) = mean_and_se(&net);
    Ok(PayoffRecord {
        number,
        draws,
        mean_net_payoff: mean,
        std_error: se,
        hit_rate: hits as f64 / draws as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_number_spec() -> LotterySpec {
        LotterySpec::new(vec![0.9, 0.1], 1, 1.0, 0.3).unwrap()
    }

    #[test]
    fn two_number_example() {
        let spec = two_number_spec();
        assert!((expected_ticket_value(&spec, 0).unwrap() - 0.275).abs() < 1e-15);
        assert!((expected_ticket_value(&spec, 1).unwrap() - 0.475).abs() < 1e-15);
        let (i, ev) = best_number(&spec);
        assert_eq!(i, 1);
        assert!((ev - 0.475).abs() < 1e-15);
    }

    #[test]
    fn no_crowd_no_sharing() {
        let spec = LotterySpec::with_draw(vec![0.5, 0.3, 0.2], vec![0.2, 0.3, 0.5], 0, 7.0, 1.0).unwrap();
        for i in 0..3 {
            let ev = expected_ticket_value(&spec, i).unwrap();
            assert!((ev - spec.draw_distribution()[i] * 7.0).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_tie_breaks_low() {
        let spec = LotterySpec::new(vec![0.25; 4], 50, 10.0, 1.0).unwrap();
        let evs: Vec<f64> = (0..4).map(|i| expected_ticket_value(&spec, i).unwrap()).collect();
        assert!(evs.iter().all(|&v| v == evs[0]));
        assert_eq!(best_number(&spec), (0, evs[0]));
    }

    #[test]
    fn crowded_number_is_never_best() {
        let spec = LotterySpec::new(vec![0.7, 0.1, 0.1, 0.1], 20, 10.0, 1.0).unwrap();
        assert_ne!(best_number(&spec).0, 0);
    }

    #[test]
    fn closed_form_agrees_with_sum() {
        for &m in &[0u64, 1, 5, 100, 10_000] {
            for &w in &[1e-13, 1e-6, 0.01, 0.3, 0.9, 1.0] {
                let a = share_factor_sum(w, m);
                let b = share_factor_closed(w, m);
                // log-gamma weights lose ~1e-11 relative at M = 10^4
                assert!((a - b).abs() < 1e-10 * a, "w={w} m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn value_decreases_with_popularity() {
        let mut last = f64::INFINITY;
        for step in 0..20 {
            let w = 0.05 * step as f64;
            let spec = LotterySpec::new(vec![w, 1.0 - w], 30, 1.0, 0.1).unwrap();
            let ev = expected_ticket_value(&spec, 0).unwrap();
            assert!(ev < last);
            last = ev;
        }
    }

    #[test]
    fn house_never_pays_more_than_jackpot() {
        let spec = LotterySpec::new(vec![0.6, 0.3, 0.1], 4, 100.0, 1.0).unwrap();
        assert!(expected_house_payout(&spec) <= 100.0);
        let single = LotterySpec::new(vec![1.0], 3, 100.0, 1.0).unwrap();
        assert!((expected_house_payout(&single) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(LotterySpec::new(vec![], 1, 1.0, 1.0).is_err());
        assert!(LotterySpec::new(vec![0.5, 0.6], 1, 1.0, 1.0).is_err());
        assert!(LotterySpec::new(vec![1.5, -0.5], 1, 1.0, 1.0).is_err());
        assert!(LotterySpec::new(vec![1.0], 1, 0.0, 1.0).is_err());
        let spec = two_number_spec();
        assert!(matches!(
            expected_ticket_value(&spec, 2),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
        assert!(simulate_lottery(&spec, 5, 10, Seed::new(0)).is_err());
    }

    #[test]
    fn fair_lottery_breaks_even() {
        let spec = LotterySpec::new(vec![0.2; 5], 0, 5.0, 1.0).unwrap();
        let rec = simulate_lottery(&spec, 2, 200_000, Seed::new(9)).unwrap();
        assert!(rec.mean_net_payoff.abs() < 3.0 * rec.std_error);
    }
}
