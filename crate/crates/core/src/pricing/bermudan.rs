use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{normal_cdf, update_knockout, GbmModel, OptionContract, PricingError, StoppingMdp, StoppingState, ACTION_NAMES, EXERCISE};
use crate::mdp::{MdpParts, SampledMdp, SparseRows};

/// How the live states of the barrier problem are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BermudanSampling {
    /// Live states, including the initial one.
    pub n_states: usize,
    /// Simulated paths whose not-yet-knocked-out points form the pool the
    /// states are drawn from.
    pub n_paths: usize,
    pub seed: u64,
    /// Divide transition densities by the pooled sampling density
    /// (stochastic-mesh weights) instead of using the raw density.
    pub mesh_weights: bool,
}

/// Probability that at least one asset is at or above `barrier` one step
/// after `prices`. Assets are independent.
pub fn knockout_probability(model: &GbmModel, prices: &[f64], barrier: f64) -> f64 {
    let survive: f64 = prices
        .iter()
        .map(|&p| normal_cdf(((barrier / p).ln() - model.log_drift()) / model.log_sd()))
        .product();
    1.0 - survive
}

/// Log of the joint one-step density of independent assets.
fn log_density(model: &GbmModel, from: &[f64], to: &[f64]) -> f64 {
    from.iter().zip(to).map(|(&a, &b)| model.log_density(a, b)).sum()
}

/// Log of the pooled sampling density: the average over exercise dates of the
/// joint density of prices at that date started from `s0`.
fn log_pool_density(model: &GbmModel, s0: f64, to: &[f64]) -> f64 {
    let dates: Vec<f64> = (1..=model.steps)
        .map(|m| {
            let t = m as f64 * model.dt();
            let sd = model.sigma * t.sqrt();
            let mean = (model.rate - 0.5 * model.sigma * model.sigma) * t;
            to.iter()
                .map(|&p| {
                    let z = ((p / s0).ln() - mean) / sd;
                    -0.5 * z * z - (p * sd * (2.0 * std::f64::consts::PI).sqrt()).ln()
                })
                .sum()
        })
        .collect();
    log_sum_exp(&dates) - (model.steps as f64).ln()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Points of simulated paths (dates 1..M) that have not been knocked out.
fn sample_live_points(model: &GbmModel, contract: &OptionContract, sampling: &BermudanSampling) -> Vec<Vec<f64>> {
    let barrier = contract.barrier;
    let pool: Vec<Vec<Vec<f64>>> = (0..sampling.n_paths)
        .into_par_iter()
        .map(|path| {
            let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
            rng.set_stream(path as u64);
            let mut state = StoppingState::live(vec![contract.s0; contract.n_assets]);
            let mut out = Vec::new();
            for _ in 0..model.steps {
                let next = state
                    .prices
                    .iter()
                    .map(|&p| model.step(p, StandardNormal.sample(&mut rng)))
                    .collect();
                state = state.observe(next, barrier);
                if state.knocked_out {
                    break;
                }
                out.push(state.prices.clone());
            }
            out
        })
        .collect();
    pool.into_iter().flatten().collect()
}

/// Live sampled states (the initial prices first), then one knocked-out
/// state and one post-exercise state, both absorbing with zero reward.
/// HOLD from a live state knocks out with the exact one-step probability;
/// the remaining mass is spread over the live states by the transition
/// density.
pub fn build_bermudan_barrier_mdp(
    model: &GbmModel,
    contract: &OptionContract,
    sampling: &BermudanSampling,
) -> Result<StoppingMdp, PricingError> {
    contract.validate()?;
    let barrier = contract.barrier.expect("validated barrier contract");
    let initial_prices = vec![contract.s0; contract.n_assets];
    if update_knockout(false, &initial_prices, Some(barrier)) {
        return Err(PricingError::Contract("initial prices are already knocked out"));
    }
    if sampling.n_states == 0 {
        return Err(PricingError::NoSamples);
    }
    let pool = sample_live_points(model, contract, sampling);
    let want = (sampling.n_states - 1).min(pool.len());
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    rng.set_stream(u64::MAX);
    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), want).into_vec();
    picked.sort_unstable();

    let mut live: Vec<Vec<f64>> = vec![initial_prices];
    live.extend(picked.into_iter().map(|i| pool[i].clone()));
    let n_live = live.len();
    let knocked = n_live;
    let exercised = n_live + 1;
    let n = n_live + 2;

    let log_q: Vec<f64> = if sampling.mesh_weights {
        live.par_iter().map(|p| log_pool_density(model, contract.s0, p)).collect()
    } else {
        vec![0.0; n_live]
    };
    let mut hold_rows: Vec<Vec<(usize, f64)>> = live
        .par_iter()
        .enumerate()
        .map(|(x, from)| {
            let pk = knockout_probability(model, from, barrier);
            let logw: Vec<f64> = live
                .iter()
                .zip(&log_q)
                .map(|(to, lq)| log_density(model, from, to) - lq)
                .collect();
            let norm = log_sum_exp(&logw);
            let mut row: Vec<(usize, f64)> = if norm.is_finite() {
                logw.iter()
                    .enumerate()
                    .map(|(y, lw)| (y, (1.0 - pk) * (lw - norm).exp()))
                    .collect()
            } else {
                vec![(x, 1.0 - pk)]
            };
            row.push((knocked, pk));
            row
        })
        .collect();
    hold_rows.push(vec![(knocked, 1.0)]);
    hold_rows.push(vec![(exercised, 1.0)]);
    let mut exercise_rows = vec![vec![(exercised, 1.0)]; n_live];
    exercise_rows.push(vec![(knocked, 1.0)]);
    exercise_rows.push(vec![(exercised, 1.0)]);
    // indexed by EXERCISE, HOLD
    let transitions = vec![
        SparseRows::normalized(exercise_rows, n)?,
        SparseRows::normalized(hold_rows, n)?,
    ];

    let mut states: Vec<StoppingState> = live.into_iter().map(StoppingState::live).collect();
    states.push(StoppingState {
        prices: vec![barrier; contract.n_assets],
        knocked_out: true,
        absorbed: false,
    });
    states.push(StoppingState {
        prices: vec![contract.strike; contract.n_assets],
        knocked_out: false,
        absorbed: true,
    });
    let mut reward = vec![0.0; n * 2];
    for (x, s) in states.iter().enumerate() {
        reward[x * 2 + EXERCISE] = contract.payoff(s);
    }
    let mut initial = vec![0.0; n];
    initial[0] = 1.0;
    let mdp = SampledMdp::new(MdpParts {
        states: states.iter().map(StoppingState::encode).collect(),
        actions: ACTION_NAMES.iter().map(|a| a.to_string()).collect(),
        transitions,
        reward,
        cost: vec![0.0; n * 2],
        cost_budget: None,
        discount: model.step_discount(),
        initial,
    })?;
    Ok(StoppingMdp::new(mdp, *model, *contract, states, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::HOLD;

    fn setup(mesh: bool) -> StoppingMdp {
        let model = GbmModel::new(0.05, 0.2, 3.0, 54).unwrap();
        let contract = OptionContract::bermudan_max_call(100.0, 170.0, 4, 100.0);
        let sampling = BermudanSampling {
            n_states: 60,
            n_paths: 20,
            seed: 3,
            mesh_weights: mesh,
        };
        build_bermudan_barrier_mdp(&model, &contract, &sampling).unwrap()
    }

    #[test]
    fn knockout_probability_limits() {
        let model = GbmModel::new(0.05, 0.2, 3.0, 54).unwrap();
        assert!(knockout_probability(&model, &[100.0; 4], 170.0) < 1e-12);
        let at = knockout_probability(&model, &[170.0, 100.0, 100.0, 100.0], 170.0);
        assert!((at - 0.5).abs() < 0.05);
    }

    #[test]
    fn structure() {
        for mesh in [false, true] {
            let sm = setup(mesh);
            let n = sm.mdp.n_states();
            assert_eq!(n, 62);
            assert_eq!(sm.live_states().len(), 60);
            assert!(sm.states[n - 2].knocked_out);
            assert!(sm.states[n - 1].absorbed);
            assert_eq!(sm.mdp.reward(n - 2, EXERCISE), 0.0);
            assert_eq!(sm.mdp.transition(HOLD).row(n - 2).collect::<Vec<_>>(), vec![(n - 2, 1.0)]);
            for s in &sm.states[..60] {
                assert!(s.prices.iter().all(|&p| p < 170.0));
            }
            assert_eq!(sm.states[0].prices, vec![100.0; 4]);
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = setup(false);
        let b = setup(false);
        assert_eq!(a.mdp, b.mdp);
    }
}
