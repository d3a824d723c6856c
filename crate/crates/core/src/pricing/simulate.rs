use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ContractKind, StoppingMdp, StoppingState, EXERCISE};
use crate::mdp::StochasticPolicy;

/// How a stochastic policy row becomes an action during simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionRule {
    /// EXERCISE when its probability is strictly larger than HOLD's.
    Greedy,
    /// Draw the action from the row.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceEstimate {
    pub mean: f64,
    /// Sample standard deviation of the discounted per-path payoff.
    pub std_dev: f64,
    /// `std_dev / sqrt(n_paths)`.
    pub std_error: f64,
    pub n_paths: usize,
}

/// Compensated (Neumaier) sum in iteration order.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

fn exercises(row: Option<&[f64]>, rule: ActionRule, rng: &mut ChaCha8Rng) -> bool {
    let Some(row) = row else { return false };
    let p = row[EXERCISE];
    match rule {
        ActionRule::Greedy => p > 1.0 - p,
        ActionRule::Sample => rng.random::<f64>() < p,
    }
}

/// Discounted payoff of one path. American contracts may stop at time zero;
/// Bermudan ones first at `dt`. Both pay the intrinsic value at maturity.
fn path_payoff(sm: &StoppingMdp, policy: &StochasticPolicy, rule: ActionRule, rng: &mut ChaCha8Rng) -> f64 {
    let model = &sm.model;
    let contract = &sm.contract;
    let mut state = StoppingState::live(vec![contract.s0; contract.n_assets]).observe(
        vec![contract.s0; contract.n_assets],
        contract.barrier,
    );
    let first = match contract.kind {
        ContractKind::AmericanCall => 0,
        ContractKind::BermudanMaxCallBarrier => 1,
    };
    for m in 0..=model.steps {
        if m > 0 {
            let next = state
                .prices
                .iter()
                .map(|&p| model.step(p, StandardNormal.sample(rng)))
                .collect();
            state = state.observe(next, contract.barrier);
        }
        if state.knocked_out {
            return 0.0;
        }
        let discount = (-model.rate * m as f64 * model.dt()).exp();
        if m == model.steps {
            return discount * contract.payoff(&state);
        }
        if m >= first {
            let x = sm.nearest_live(&state.prices);
            if exercises(policy.row(x), rule, rng) {
                return discount * contract.payoff(&state);
            }
        }
    }
    unreachable!("the loop returns at maturity")
}

/// Monte-Carlo value of following `policy` (looked up at the nearest live
/// sampled state). Path `i` draws from its own ChaCha stream `i` under
/// `seed`, and payoffs are summed in path order, so the estimate does not
/// depend on the thread count.
pub fn simulate_policy_price(
    sm: &StoppingMdp,
    policy: &StochasticPolicy,
    n_paths: usize,
    seed: u64,
    rule: ActionRule,
) -> PriceEstimate {
    let payoffs: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            path_payoff(sm, policy, rule, &mut rng)
        })
        .collect();
    let n = n_paths.max(1) as f64;
    let mean = compensated_sum(payoffs.iter().copied()) / n;
    let var = if n_paths > 1 {
        compensated_sum(payoffs.iter().map(|p| (p - mean) * (p - mean))) / (n - 1.0)
    } else {
        0.0
    };
    let std_dev = var.sqrt();
    PriceEstimate {
        mean,
        std_dev,
        std_error: std_dev / n.sqrt(),
        n_paths,
    }
}
