use serde::{Deserialize, Serialize};

use super::PricingError;
use crate::mdp::SparseRows;

/// Standard normal CDF through the complementary error function, which keeps
/// full relative accuracy in the lower tail.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Black-Scholes price of a European call. At `tau = 0` the intrinsic value.
pub fn bs_call(spot: f64, strike: f64, rate: f64, sigma: f64, tau: f64) -> f64 {
    if tau <= 0.0 {
        return (spot - strike).max(0.0);
    }
    let vol = sigma * tau.sqrt();
    let d1 = ((spot / strike).ln() + (rate + 0.5 * sigma * sigma) * tau) / vol;
    let d2 = d1 - vol;
    normal_cdf(d1) * spot - normal_cdf(d2) * strike * (-rate * tau).exp()
}

/// Risk-neutral geometric Brownian motion observed at `steps` equally spaced
/// dates over `horizon` years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub rate: f64,
    pub sigma: f64,
    pub horizon: f64,
    pub steps: usize,
}

impl GbmModel {
    pub fn new(rate: f64, sigma: f64, horizon: f64, steps: usize) -> Result<Self, PricingError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(PricingError::Model("volatility must be positive"));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(PricingError::Model("horizon must be positive"));
        }
        if steps == 0 {
            return Err(PricingError::Model("need at least one step"));
        }
        if !rate.is_finite() {
            return Err(PricingError::Model("rate must be finite"));
        }
        Ok(GbmModel {
            rate,
            sigma,
            horizon,
            steps,
        })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn step_discount(&self) -> f64 {
        (-self.rate * self.dt()).exp()
    }

    /// Mean of the one-step log-return.
    pub fn log_drift(&self) -> f64 {
        (self.rate - 0.5 * self.sigma * self.sigma) * self.dt()
    }

    /// Standard deviation of the one-step log-return.
    pub fn log_sd(&self) -> f64 {
        self.sigma * self.dt().sqrt()
    }

    /// Lognormal density of the next price `to` given the current price `from`.
    pub fn density(&self, from: f64, to: f64) -> f64 {
        self.log_density(from, to).exp()
    }

    pub fn log_density(&self, from: f64, to: f64) -> f64 {
        let sd = self.log_sd();
        let z = ((to / from).ln() - self.log_drift()) / sd;
        -0.5 * z * z - (to * sd * (2.0 * std::f64::consts::PI).sqrt()).ln()
    }

    /// One exact step from `price` driven by the standard normal `z`.
    pub fn step(&self, price: f64, z: f64) -> f64 {
        price * (self.log_drift() + self.log_sd() * z).exp()
    }
}

/// HOLD transitions on a price grid: the one-step density at every grid
/// point, each row renormalized.
pub fn gbm_transition_matrix(model: &GbmModel, grid: &[f64]) -> Result<SparseRows, PricingError> {
    if grid.is_empty() || grid.iter().any(|p| !(*p > 0.0 && p.is_finite())) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PricingError::Grid);
    }
    let rows = grid
        .iter()
        .map(|&from| grid.iter().map(|&to| model.density(from, to)).enumerate().collect())
        .collect();
    Ok(SparseRows::normalized(rows, grid.len())?)
}
