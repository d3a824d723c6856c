//! Optimal-stopping MDPs for option pricing.
//!
//! Two actions everywhere: [`EXERCISE`] collects the payoff and moves to an
//! absorbing terminal state, [`HOLD`] lets prices evolve one step of a
//! geometric Brownian motion. Per-step discount is `exp(-rate * dt)`.
//! State vectors handed to the feature generators are log-prices followed by
//! the knockout and absorbed flags.

mod american;
mod bermudan;
mod gbm;
mod simulate;

pub use american::{american_call_grid, build_american_call_mdp};
pub use bermudan::{build_bermudan_barrier_mdp, knockout_probability, BermudanSampling};
pub use gbm::{bs_call, gbm_transition_matrix, normal_cdf, GbmModel};
pub use simulate::{simulate_policy_price, ActionRule, PriceEstimate};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{MdpError, SampledMdp, StochasticPolicy};

pub const EXERCISE: usize = 0;
pub const HOLD: usize = 1;
pub const ACTION_NAMES: [&str; 2] = ["EXERCISE", "HOLD"];

#[derive(Debug, Error, PartialEq)]
pub enum PricingError {
    #[error("invalid model: {0}")]
    Model(&'static str),
    #[error("invalid contract: {0}")]
    Contract(&'static str),
    #[error("price grid must be strictly positive and increasing")]
    Grid,
    #[error("initial price {s0} lies outside the sampled range [{lo}, {hi}]")]
    OutsideGrid { s0: f64, lo: f64, hi: f64 },
    #[error("no live states were sampled")]
    NoSamples,
    #[error(transparent)]
    Mdp(#[from] MdpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractKind {
    AmericanCall,
    BermudanMaxCallBarrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionContract {
    pub kind: ContractKind,
    pub strike: f64,
    /// Up-and-out level on the maximum price; barrier contracts only.
    pub barrier: Option<f64>,
    pub n_assets: usize,
    /// Initial price, common to every asset.
    pub s0: f64,
}

impl OptionContract {
    pub fn american_call(strike: f64, s0: f64) -> Self {
        OptionContract {
            kind: ContractKind::AmericanCall,
            strike,
            barrier: None,
            n_assets: 1,
            s0,
        }
    }

    pub fn bermudan_max_call(strike: f64, barrier: f64, n_assets: usize, s0: f64) -> Self {
        OptionContract {
            kind: ContractKind::BermudanMaxCallBarrier,
            strike,
            barrier: Some(barrier),
            n_assets,
            s0,
        }
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        if !(self.strike > 0.0 && self.strike.is_finite()) {
            return Err(PricingError::Contract("strike must be positive"));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(PricingError::Contract("initial price must be positive"));
        }
        if self.n_assets == 0 {
            return Err(PricingError::Contract("need at least one asset"));
        }
        match (self.kind, self.barrier) {
            (ContractKind::AmericanCall, None) if self.n_assets == 1 => Ok(()),
            (ContractKind::AmericanCall, _) => Err(PricingError::Contract("american call takes one asset and no barrier")),
            (ContractKind::BermudanMaxCallBarrier, Some(b)) if b > self.strike => Ok(()),
            (ContractKind::BermudanMaxCallBarrier, _) => Err(PricingError::Contract("barrier must exceed the strike")),
        }
    }

    /// Exercise value of a state.
    pub fn payoff(&self, state: &StoppingState) -> f64 {
        if state.knocked_out || state.absorbed {
            return 0.0;
        }
        let top = state.prices.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (top - self.strike).max(0.0)
    }
}

/// Prices plus the knockout and post-exercise flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingState {
    pub prices: Vec<f64>,
    pub knocked_out: bool,
    pub absorbed: bool,
}

impl StoppingState {
    pub fn live(prices: Vec<f64>) -> Self {
        StoppingState {
            prices,
            knocked_out: false,
            absorbed: false,
        }
    }

    /// The knockout flag after observing `prices`: once set it stays set.
    pub fn observe(&self, prices: Vec<f64>, barrier: Option<f64>) -> Self {
        StoppingState {
            knocked_out: update_knockout(self.knocked_out, &prices, barrier),
            prices,
            absorbed: self.absorbed,
        }
    }

    /// Feature-space encoding: log-prices, then the two flags.
    pub fn encode(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.prices.iter().map(|p| p.ln()).collect();
        v.push(if self.knocked_out { 1.0 } else { 0.0 });
        v.push(if self.absorbed { 1.0 } else { 0.0 });
        v
    }
}

/// `y_t = max(y_{t-1}, 1[max_j p_j >= B])`.
pub fn update_knockout(previous: bool, prices: &[f64], barrier: Option<f64>) -> bool {
    previous || barrier.is_some_and(|b| prices.iter().any(|&p| p >= b))
}

/// A stopping problem as a sampled MDP plus what is needed to act on it.
#[derive(Debug, Clone)]
pub struct StoppingMdp {
    pub mdp: SampledMdp,
    pub model: GbmModel,
    pub contract: OptionContract,
    /// One entry per MDP state, in MDP order.
    pub states: Vec<StoppingState>,
    /// Index of the state the initial distribution sits on.
    pub initial_state: usize,
    /// Log-prices of the live states, for nearest-neighbour lookup.
    live_points: Vec<Vec<f64>>,
    live_index: Vec<usize>,
}

impl StoppingMdp {
    pub(crate) fn new(
        mdp: SampledMdp,
        model: GbmModel,
        contract: OptionContract,
        states: Vec<StoppingState>,
        initial_state: usize,
    ) -> Self {
        let live_index: Vec<usize> = (0..states.len()).filter(|&i| states[i].is_live()).collect();
        let live_points = live_index
            .iter()
            .map(|&i| states[i].prices.iter().map(|p| p.ln()).collect())
            .collect();
        StoppingMdp {
            mdp,
            model,
            contract,
            states,
            initial_state,
            live_points,
            live_index,
        }
    }

    pub fn live_states(&self) -> &[usize] {
        &self.live_index
    }

    /// Live state closest to `prices` in log-price distance (first on ties).
    pub fn nearest_live(&self, prices: &[f64]) -> usize {
        let q: Vec<f64> = prices.iter().map(|p| p.ln()).collect();
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.live_points.iter().enumerate() {
            let d: f64 = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        self.live_index[best.0]
    }

    /// Never exercise early: HOLD with probability one on every live state,
    /// undefined on absorbing states.
    pub fn always_hold(&self) -> StochasticPolicy {
        let rows = self
            .states
            .iter()
            .map(|s| s.is_live().then(|| vec![0.0, 1.0]))
            .collect();
        StochasticPolicy::new(2, rows).expect("rows are distributions")
    }
}

impl StoppingState {
    pub fn is_live(&self) -> bool {
        !self.knocked_out && !self.absorbed
    }
}

/// Fraction of states with a reference row where the two policies' probabilities
/// of `action` differ by less than `epsilon`. A missing row in `policy`
/// counts as a miss.
pub fn epsilon_optimal_rate(policy: &StochasticPolicy, reference: &StochasticPolicy, action: usize, epsilon: f64) -> f64 {
    let mut total = 0usize;
    let mut hits = 0usize;
    for x in 0..reference.n_states() {
        let Some(r) = reference.prob(x, action) else { continue };
        total += 1;
        if policy.prob(x, action).is_some_and(|p| (p - r).abs() < epsilon) {
            hits += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Published lower and upper bounds for the 4-asset max-call with an
/// up-and-out barrier (strike 100, barrier 170, three years, 5% rate, 20%
/// volatility, 54 exercise dates), keyed by the common initial price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierBenchmark {
    pub s0: f64,
    pub ls_lower: f64,
    pub po_lower: f64,
    pub aadp: f64,
    pub aadp_std: f64,
    pub dp_upper: f64,
    pub po_upper: f64,
    pub dvf_upper: f64,
}

pub const BARRIER_BENCHMARKS: [BarrierBenchmark; 3] = [
    BarrierBenchmark {
        s0: 90.0,
        ls_lower: 32.754,
        po_lower: 33.011,
        aadp: 34.726,
        aadp_std: 2.17,
        dp_upper: 34.989,
        po_upper: 35.117,
        dvf_upper: 35.251,
    },
    BarrierBenchmark {
        s0: 100.0,
        ls_lower: 40.797,
        po_lower: 41.541,
        aadp: 43.332,
        aadp_std: 1.78,
        dp_upper: 43.587,
        po_upper: 43.853,
        dvf_upper: 44.017,
    },
    BarrierBenchmark {
        s0: 110.0,
        ls_lower: 46.929,
        po_lower: 48.169,
        aadp: 50.1,
        aadp_std: 1.41,
        dp_upper: 49.909,
        po_upper: 50.184,
        dvf_upper: 50.479,
    },
];

impl BarrierBenchmark {
    pub fn for_s0(s0: f64) -> Option<&'static BarrierBenchmark> {
        BARRIER_BENCHMARKS.iter().find(|b| b.s0 == s0)
    }

    /// Widest published interval: lowest lower bound to highest upper bound.
    pub fn range(&self) -> (f64, f64) {
        (self.ls_lower.min(self.po_lower), self.dvf_upper.max(self.po_upper).max(self.dp_upper))
    }
}
