//! Kelly fractions for repeated double-or-nothing games.
//!
//! A bettor facing `n` simultaneous independent games, each won with
//! probability `p`, stakes a total fraction `f` of wealth split equally as
//! `f/n` per game. With `k` wins the round multiplies wealth by
//! `1 + f(2k - n)/n`.
//!
//! Two answers for the optimal `f` are exposed. [`kelly_multi_paper`] is the
//! closed form `(p^n - q^n) / (p^n + q^n)`; [`optimize_fraction`] maximizes the
//! exact expected log growth. They agree for `n = 1` and `n = 2` only: for
//! `n >= 3` the closed form balances just the two extreme outcomes (all won,
//! all lost) and the true optimum lies above it. Both are reported so callers
//! can see the gap.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_open, Error, Result};
use crate::path::Path;
use crate::rng::Seed;

/// Largest game count for which the binomial sum is enumerated.
pub const MAX_ENUMERATED_GAMES: u32 = 60;

/// Upper end of the optimizer bracket; `f = 1` puts `ln 0` in the objective.
pub const FRACTION_CEILING: f64 = 1.0 - 1e-9;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    pub p: f64,
    pub n_games: u32,
}

impl GameSpec {
    /// `p = 1` is accepted as the degenerate sure-win game so simulations can
    /// be checked against a deterministic path; the Kelly formulas themselves
    /// still require `p < 1`.
    pub fn new(p: f64, n_games: u32) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid("p", format!("{p} not in (0, 1]")));
        }
        if n_games == 0 {
            return Err(Error::invalid("n_games", "must be at least 1"));
        }
        Ok(GameSpec { p, n_games })
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

/// Total fraction staked per round, split equally across the games.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    total_fraction: f64,
    n_games: u32,
}

impl Allocation {
    pub fn new(total_fraction: f64, n_games: u32) -> Result<Self> {
        if !(0.0..1.0).contains(&total_fraction) {
            return Err(Error::invalid(
                "total_fraction",
                format!("{total_fraction} not in [0, 1)"),
            ));
        }
        if n_games == 0 {
            return Err(Error::invalid("n_games", "must be at least 1"));
        }
        Ok(Allocation {
            total_fraction,
            n_games,
        })
    }

    pub fn total_fraction(&self) -> f64 {
        self.total_fraction
    }

    pub fn per_game_fraction(&self) -> f64 {
        self.total_fraction / f64::from(self.n_games)
    }

    pub fn n_games(&self) -> u32 {
        self.n_games
    }

    /// Wealth multiplier for a round with `wins` games won.
    #[inline]
    pub fn multiplier(&self, wins: u32) -> f64 {
        round_multiplier(self.total_fraction, wins, self.n_games)
    }
}

#[inline]
pub(crate) fn round_multiplier(total_fraction: f64, wins: u32, n: u32) -> f64 {
    let n = f64::from(n);
    1.0 + total_fraction * (2.0 * f64::from(wins) - n) / n
}

/// Kelly fraction for a single even-money game: `max(2p - 1, 0)`.
pub fn kelly_single(p: f64) -> Result<f64> {
    check_open("p", p, 0.0, 1.0)?;
    Ok((2.0 * p - 1.0).max(0.0))
}

/// Closed-form diversified fraction `(p^n - q^n) / (p^n + q^n)`.
///
/// Evaluated as `(1 - r^n) / (1 + r^n)` with `r = q/p < 1`, which stays exact
/// as `r^n` underflows. Returns `2p - 1` for `n = 1`.
pub fn kelly_multi_paper(p: f64, n: u32) -> Result<f64> {
    check_open("p", p, 0.5, 1.0)?;
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if n == 1 {
        return Ok(2.0 * p - 1.0);
    }
    let rn = ((1.0 - p) / p).powi(n as i32);
    Ok((1.0 - rn) / (1.0 + rn))
}

/// Binomial outcome table: `(weight, return)` for each win count `k`, where
/// the return is `(2k - n)/n`.
fn outcomes(p: f64, n: u32) -> Result<Vec<(f64, f64)>> {
    check_open("p", p, 0.0, 1.0)?;
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if n > MAX_ENUMERATED_GAMES {
        return Err(Error::TooManyGames {
            n,
            max: MAX_ENUMERATED_GAMES,
        });
    }
    let nf = f64::from(n);
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let ln_n_fact = ln_gamma(nf + 1.0);
    Ok((0..=n)
        .map(|k| {
            let kf = f64::from(k);
            let ln_choose = ln_n_fact - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
            let weight = (ln_choose + kf * lp + (nf - kf) * lq).exp();
            (weight, (2.0 * kf - nf) / nf)
        })
        .collect())
}

fn check_fraction(f: f64) -> Result<()> {
    if (0.0..1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::invalid("f", format!("{f} not in [0, 1)")))
    }
}

/// Exact one-round expected log growth `G(f)` under equal allocation.
pub fn expected_log_growth(p: f64, n: u32, f: f64) -> Result<f64> {
    check_fraction(f)?;
    Ok(outcomes(p, n)?
        .iter()
        .map(|&(w, x)| w * (f * x).ln_1p())
        .sum())
}

/// Derivative `G'(f)`; strictly decreasing in `f` since `G` is concave.
pub fn expected_log_growth_slope(p: f64, n: u32, f: f64) -> Result<f64> {
    check_fraction(f)?;
    Ok(slope(&outcomes(p, n)?, f))
}

fn slope(table: &[(f64, f64)], f: f64) -> f64 {
    table.iter().map(|&(w, x)| w * x / (1.0 + f * x)).sum()
}

/// Numerically optimal total fraction for `n` games.
///
/// Golden-section search on `G` narrows the bracket while function values are
/// still well separated; the last digits come from bisecting the sign of
/// `G'`, which unlike a comparison of nearly equal `G` values resolves the
/// maximizer to `tol`.
pub fn optimize_fraction(p: f64, n: u32, tol: f64) -> Result<f64> {
    check_open("p", p, 0.5, 1.0)?;
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("{tol} must be positive")));
    }
    let table = outcomes(p, n)?;
    let growth = |f: f64| -> f64 { table.iter().map(|&(w, x)| w * (f * x).ln_1p()).sum() };

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (0.0, FRACTION_CEILING);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (growth(c), growth(d));
    while b - a > 1e-4_f64.max(tol) {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = growth(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = growth(d);
        }
    }

    // The golden bracket contains the maximizer unless it sits against an
    // end of the domain; widen in that case.
    if slope(&table, a) < 0.0 {
        a = 0.0;
    }
    if slope(&table, b) > 0.0 {
        b = FRACTION_CEILING;
    }
    if slope(&table, b) >= 0.0 {
        return Ok(b);
    }
    if slope(&table, a) <= 0.0 {
        return Ok(a);
    }
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if slope(&table, mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Round-by-round log wealth `ln W_t` starting from `W_0 = 1` (so the path
/// starts at 0). Logs keep long runs finite: 10^5 rounds at Kelly stakes
/// compound far past `f64::MAX`.
pub fn simulate_rounds(game: GameSpec, alloc: Allocation, rounds: u64, seed: Seed) -> Result<Path> {
    if alloc.n_games() != game.n_games {
        return Err(Error::invalid(
            "alloc",
            format!(
                "allocation for {} games used on {} games",
                alloc.n_games(),
                game.n_games
            ),
        ));
    }
    let mut rng = seed.rng();
    let mut log_wealth = Vec::with_capacity(rounds as usize + 1);
    let mut lw = 0.0;
    log_wealth.push(lw);
    for _ in 0..rounds {
        let outcome = play_round(&mut rng, game);
        lw += alloc.multiplier(outcome.wins).ln();
        log_wealth.push(lw);
    }
    Path::indexed(log_wealth)
}

/// Outcome of one round of `n` games.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RoundOutcome {
    pub wins: u32,
    pub first_won: bool,
}

#[inline]
pub(crate) fn play_round<R: Rng + ?Sized>(rng: &mut R, game: GameSpec) -> RoundOutcome {
    let mut wins = 0;
    let mut first_won = false;
    for i in 0..game.n_games {
        let won = rng.random::<f64>() < game.p;
        if i == 0 {
            first_won = won;
        }
        wins += u32::from(won);
    }
    RoundOutcome { wins, first_won }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_game_values() {
        assert!((kelly_single(0.6).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(kelly_single(0.5).unwrap(), 0.0);
        assert_eq!(kelly_single(0.3).unwrap(), 0.0);
        assert!((kelly_single(0.9).unwrap() - 0.8).abs() < 1e-15);
        assert!(kelly_single(0.0).is_err());
        assert!(kelly_single(1.0).is_err());
    }

    #[test]
    fn paper_formula_values() {
        assert!((kelly_multi_paper(0.6, 1).unwrap() - 0.2).abs() < 1e-15);
        assert!((kelly_multi_paper(0.6, 2).unwrap() - 0.2 / 0.52).abs() < 1e-15);
        let f50 = kelly_multi_paper(0.6, 50).unwrap();
        assert!(f50 < 1.0 && 1.0 - f50 < 1e-8);
        assert!(kelly_multi_paper(0.5, 3).is_err());
        assert!(kelly_multi_paper(0.6, 0).is_err());
        // no underflow trouble far out
        assert_eq!(kelly_multi_paper(0.6, 5000).unwrap(), 1.0);
    }

    #[test]
    fn growth_values() {
        let g = expected_log_growth(0.6, 1, 0.2).unwrap();
        let direct = 0.6 * 1.2f64.ln() + 0.4 * 0.8f64.ln();
        assert!((g - direct).abs() < 1e-15);
        assert!((g - 0.020_135_513_550_688_9).abs() < 1e-12);
        assert_eq!(expected_log_growth(0.37, 7, 0.0).unwrap(), 0.0);
        assert!(expected_log_growth(0.5, 1, 0.3).unwrap() < 0.0);
        assert!(expected_log_growth(0.6, 1, 1.0).is_err());
        assert!(matches!(
            expected_log_growth(0.6, 61, 0.5),
            Err(Error::TooManyGames { n: 61, .. })
        ));
    }

    #[test]
    fn optimizer_matches_closed_form_at_one_and_two() {
        for &p in &[0.51, 0.6, 0.75, 0.9, 0.99] {
            for n in 1..=2 {
                let num = optimize_fraction(p, n, DEFAULT_TOL).unwrap();
                let paper = kelly_multi_paper(p, n).unwrap();
                assert!((num - paper).abs() < 1e-9, "p={p} n={n}: {num} vs {paper}");
            }
        }
    }

    #[test]
    fn optimizer_rejects_bad_input() {
        assert!(optimize_fraction(0.5, 2, 1e-10).is_err());
        assert!(optimize_fraction(0.6, 2, 0.0).is_err());
    }

    #[test]
    fn sure_win_simulation() {
        let game = GameSpec::new(1.0, 1).unwrap();
        let alloc = Allocation::new(0.5, 1).unwrap();
        let path = simulate_rounds(game, alloc, 10, Seed::new(1)).unwrap();
        assert!((path.last().exp() - 1.5f64.powi(10)).abs() < 1e-10);
    }

    #[test]
    fn zero_bet_is_flat() {
        let game = GameSpec::new(0.6, 4).unwrap();
        let alloc = Allocation::new(0.0, 4).unwrap();
        let path = simulate_rounds(game, alloc, 100, Seed::new(3)).unwrap();
        assert!(path.values().iter().all(|&lw| lw == 0.0));
    }

    #[test]
    fn allocation_checks() {
        assert!(Allocation::new(1.0, 2).is_err());
        assert!(Allocation::new(-0.1, 2).is_err());
        let a = Allocation::new(0.3, 3).unwrap();
        assert!((a.per_game_fraction() * 3.0 - 0.3).abs() < 1e-16);
        let game = GameSpec::new(0.6, 2).unwrap();
        assert!(simulate_rounds(game, a, 10, Seed::new(0)).is_err());
    }

    proptest! {
        #[test]
        fn growth_is_concave(p in 0.05f64..0.95, n in 1u32..30, a in 0.0f64..0.99, b in 0.0f64..0.99) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let mid = 0.5 * (lo + hi);
            let g = |f| expected_log_growth(p, n, f).unwrap();
            prop_assert!(g(mid) + 1e-12 >= 0.5 * (g(lo) + g(hi)));
        }

        #[test]
        fn optimum_at_least_single_game(p in 0.501f64..0.99, n in 1u32..20) {
            let f = optimize_fraction(p, n, DEFAULT_TOL).unwrap();
            prop_assert!(f >= 2.0 * p - 1.0 - 1e-9);
        }

        #[test]
        fn paper_formula_increases_to_one(p in 0.501f64..0.99, n in 1u32..200) {
            let a = kelly_multi_paper(p, n).unwrap();
            let b = kelly_multi_paper(p, n + 1).unwrap();
            prop_assert!(b >= a && b <= 1.0);
        }
    }
}
