//! Exact simulators for the market models.
//!
//! * Stochastic drift: `dS/S = (r + sigma*lambda) dt + sigma dW`, with the market
//!   price of risk `lambda` an OU process
//!   `d lambda = kappa (lambda_hat - lambda) dt + sigma_hat dW'`, `W` and `W'`
//!   independent.
//! * Trending OU: `dS = (mu - kappa (S - mu t)) dt + sigma dW`, which oscillates
//!   around the line `mu t`.
//! * GBM as a control.
//!
//! OU and GBM transitions are sampled from their exact laws. In the stochastic
//! drift model `lambda` is frozen at its start-of-step value inside the price
//! drift, an `O(dt)` approximation of the cross term.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_positive, Error, Result};
use crate::path::Path;
use crate::rng::{derive_stream, standard_normal, Seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_end: f64,
    pub n_steps: usize,
}

impl Default for GridSpec {
    /// Ten years of daily-ish steps.
    fn default() -> Self {
        GridSpec {
            t_end: 10.0,
            n_steps: 2500,
        }
    }
}

impl GridSpec {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        let grid = GridSpec { t_end, n_steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("t_end", self.t_end)?;
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be at least 1"));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..=self.n_steps)
            .map(|i| if i == self.n_steps { self.t_end } else { i as f64 * dt })
            .collect()
    }

    /// Grid index closest to time `t`.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.dt()).round() as usize).min(self.n_steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticDriftParams {
    pub r: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub lambda_hat: f64,
    pub sigma_hat: f64,
    pub lambda0: f64,
    pub s0: f64,
}

impl StochasticDriftParams {
    pub fn validate(&self) -> Result<()> {
        check_finite("r", self.r)?;
        check_positive("sigma", self.sigma)?;
        check_positive("kappa", self.kappa)?;
        check_finite("lambda_hat", self.lambda_hat)?;
        check_finite("lambda0", self.lambda0)?;
        if !(self.sigma_hat >= 0.0 && self.sigma_hat.is_finite()) {
            return Err(Error::invalid("sigma_hat", "must be finite and non-negative"));
        }
        check_positive("s0", self.s0)
    }

    /// `E[lambda_t]` given `lambda_0`.
    pub fn lambda_mean(&self, t: f64) -> f64 {
        self.lambda_hat + (self.lambda0 - self.lambda_hat) * (-self.kappa * t).exp()
    }

    /// `Var[lambda_t]` given `lambda_0`.
    pub fn lambda_variance(&self, t: f64) -> f64 {
        ou_variance(self.kappa, self.sigma_hat, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendOUParams {
    pub mu: f64,
    pub kappa: f64,
    pub sigma: f64,
    pub s0: f64,
}

impl TrendOUParams {
    pub fn validate(&self) -> Result<()> {
        check_finite("mu", self.mu)?;
        check_positive("kappa", self.kappa)?;
        check_positive("sigma", self.sigma)?;
        check_finite("s0", self.s0)
    }

    /// Instantaneous drift `mu - kappa (S - mu t)`.
    pub fn drift(&self, s: f64, t: f64) -> f64 {
        self.mu - self.kappa * (s - self.mu * t)
    }

    pub fn mean(&self, t: f64) -> f64 {
        self.mu * t + self.s0 * (-self.kappa * t).exp()
    }

    pub fn variance(&self, t: f64) -> f64 {
        ou_variance(self.kappa, self.sigma, t)
    }
}

/// Variance of an OU process after time `t` from a fixed start.
pub fn ou_variance(kappa: f64, vol: f64, t: f64) -> f64 {
    vol * vol * -(-2.0 * kappa * t).exp_m1() / (2.0 * kappa)
}

/// Exact OU transition over `dt` driven by the standard normal `z`.
#[inline]
pub fn ou_step_exact(x: f64, mean: f64, kappa: f64, vol: f64, dt: f64, z: f64) -> f64 {
    let decay = (-kappa * dt).exp();
    let sd = vol * (-(-2.0 * kappa * dt).exp_m1() / (2.0 * kappa)).sqrt();
    mean + (x - mean) * decay + sd * z
}

/// Price and market-price-of-risk paths on a shared grid.
///
/// The two Brownian motions use the child streams `"price"` and `"lambda"` of
/// `seed`.
pub fn simulate_stochastic_drift(
    params: &StochasticDriftParams,
    grid: GridSpec,
    seed: Seed,
) -> Result<(Path, Path)> {
    params.validate()?;
    grid.validate()?;
    let dt = grid.dt();
    let mut price_rng = derive_stream(seed, "price").rng();
    let mut lambda_rng = derive_stream(seed, "lambda").rng();
    let sigma = params.sigma;
    let diffusion = sigma * dt.sqrt();

    let mut log_s = params.s0.ln();
    let mut lambda = params.lambda0;
    let mut prices = Vec::with_capacity(grid.n_steps + 1);
    let mut lambdas = Vec::with_capacity(grid.n_steps + 1);
    prices.push(params.s0);
    lambdas.push(lambda);
    for _ in 0..grid.n_steps {
        let z_price = standard_normal(&mut price_rng);
        let z_lambda = standard_normal(&mut lambda_rng);
        log_s += (params.r + sigma * lambda - 0.5 * sigma * sigma) * dt + diffusion * z_price;
        lambda = ou_step_exact(lambda, params.lambda_hat, params.kappa, params.sigma_hat, dt, z_lambda);
        prices.push(log_s.exp());
        lambdas.push(lambda);
    }
    let times = grid.times();
    Ok((
        Path::new(times.clone(), prices)?,
        Path::new(times, lambdas)?,
    ))
}

/// Trending OU path via `X = S - mu t`, a zero-mean OU process stepped exactly.
pub fn simulate_trend_ou(params: &TrendOUParams, grid: GridSpec, seed: Seed) -> Result<Path> {
    params.validate()?;
    grid.validate()?;
    let dt = grid.dt();
    let times = grid.times();
    let mut rng = seed.rng();
    let mut x = params.s0;
    let mut values = Vec::with_capacity(grid.n_steps + 1);
    values.push(params.s0);
    for &t in &times[1..] {
        x = ou_step_exact(x, 0.0, params.kappa, params.sigma, dt, standard_normal(&mut rng));
        values.push(x + params.mu * t);
    }
    Path::new(times, values)
}

/// Geometric Brownian motion with exact log-normal steps.
pub fn simulate_gbm(mu: f64, sigma: f64, s0: f64, grid: GridSpec, seed: Seed) -> Result<Path> {
    check_finite("mu", mu)?;
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma", "must be finite and non-negative"));
    }
    check_positive("s0", s0)?;
    grid.validate()?;
    let dt = grid.dt();
    let times = grid.times();
    let mut rng = seed.rng();
    let drift = (mu - 0.5 * sigma * sigma) * dt;
    let diffusion = sigma * dt.sqrt();
    let ln_s0 = s0.ln();
    let mut noise = 0.0;
    let mut values = Vec::with_capacity(grid.n_steps + 1);
    values.push(s0);
    for i in 1..=grid.n_steps {
        noise += diffusion * standard_normal(&mut rng);
        // i * drift rather than a running sum keeps the zero-noise path on s0 * exp(mu t)
        values.push((ln_s0 + i as f64 * drift + noise).exp());
    }
    Path::new(times, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ou_step_deterministic_cases() {
        assert_eq!(ou_step_exact(0.3, 0.3, 2.0, 0.0, 0.1, 1.7), 0.3);
        let x = ou_step_exact(1.0, 0.0, 1.0, 0.0, std::f64::consts::LN_2, 0.0);
        assert!((x - 0.5).abs() < 1e-15);
    }

    #[test]
    fn half_steps_compose_to_full_step() {
        // mean and variance of two dt/2 steps equal one dt step
        let (kappa, vol, dt, x, m) = (1.7, 0.4, 0.3, 0.9, -0.2);
        let one_mean = ou_step_exact(x, m, kappa, 0.0, dt, 0.0);
        let half = ou_step_exact(x, m, kappa, 0.0, dt / 2.0, 0.0);
        let two_mean = ou_step_exact(half, m, kappa, 0.0, dt / 2.0, 0.0);
        assert!((one_mean - two_mean).abs() < 1e-15);
        let one_var = ou_variance(kappa, vol, dt);
        let half_var = ou_variance(kappa, vol, dt / 2.0);
        let two_var = half_var * (-kappa * dt).exp() + half_var;
        assert!((one_var - two_var).abs() < 1e-15);
    }

    #[test]
    fn zero_noise_skeletons() {
        let grid = GridSpec::new(5.0, 500).unwrap();
        let gbm = simulate_gbm(0.07, 0.0, 3.0, grid, Seed::new(1)).unwrap();
        for (&t, &s) in gbm.times().iter().zip(gbm.values()) {
            assert!((s - 3.0 * (0.07 * t).exp()).abs() < 1e-10);
        }

        let params = StochasticDriftParams {
            r: 0.01,
            sigma: 0.2,
            kappa: 1.5,
            lambda_hat: 0.3,
            sigma_hat: 0.0,
            lambda0: -0.5,
            s0: 1.0,
        };
        let (_, lambda) = simulate_stochastic_drift(&params, grid, Seed::new(2)).unwrap();
        for (&t, &l) in lambda.times().iter().zip(lambda.values()) {
            assert!((l - params.lambda_mean(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn trend_ou_tracks_line_without_noise() {
        let params = TrendOUParams {
            mu: 2.0,
            kappa: 3.0,
            sigma: 1e-8,
            s0: 0.0,
        };
        let grid = GridSpec::new(20.0, 2000).unwrap();
        let path = simulate_trend_ou(&params, grid, Seed::new(5)).unwrap();
        for (&t, &s) in path.times().iter().zip(path.values()) {
            if t > 5.0 {
                assert!((s - 2.0 * t).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_invalid_params() {
        let grid = GridSpec::default();
        let mut params = StochasticDriftParams {
            r: 0.0,
            sigma: 0.0,
            kappa: 1.0,
            lambda_hat: 0.3,
            sigma_hat: 0.4,
            lambda0: 0.3,
            s0: 1.0,
        };
        assert!(simulate_stochastic_drift(&params, grid, Seed::new(0)).is_err());
        params.sigma = 0.2;
        params.kappa = 0.0;
        assert!(simulate_stochastic_drift(&params, grid, Seed::new(0)).is_err());
        assert!(GridSpec::new(0.0, 10).is_err());
        assert!(GridSpec::new(1.0, 0).is_err());
        assert!(simulate_gbm(0.0, -0.1, 1.0, grid, Seed::new(0)).is_err());
    }

    #[test]
    fn prices_positive() {
        let params = StochasticDriftParams {
            r: 0.0,
            sigma: 0.6,
            kappa: 0.5,
            lambda_hat: -0.5,
            sigma_hat: 1.0,
            lambda0: 0.0,
            s0: 1.0,
        };
        let (price, _) = simulate_stochastic_drift(&params, GridSpec::default(), Seed::new(4)).unwrap();
        assert!(price.values().iter().all(|&s| s > 0.0));
    }

    #[test]
    fn grid_times_end_exactly() {
        let grid = GridSpec::new(1.0, 3).unwrap();
        let t = grid.times();
        assert_eq!(t.len(), 4);
        assert_eq!(t[3], 1.0);
        assert_eq!(grid.index_of(0.34), 1);
    }
}
