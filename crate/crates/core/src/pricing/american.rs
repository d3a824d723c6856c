use super::{gbm_transition_matrix, GbmModel, OptionContract, PricingError, StoppingMdp, StoppingState, ACTION_NAMES, EXERCISE};
use crate::mdp::{MdpParts, SampledMdp, SparseRows};

/// `n` equally spaced prices covering six standard deviations of the
/// terminal log-price on either side of its mean.
pub fn american_call_grid(model: &GbmModel, s0: f64, n: usize) -> Vec<f64> {
    let t = model.horizon;
    let mean = (model.rate - 0.5 * model.sigma * model.sigma) * t;
    let half = 6.0 * model.sigma * t.sqrt();
    let lo = s0 * (mean - half).exp();
    let hi = s0 * (mean + half).exp();
    if n == 1 {
        return vec![s0];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Grid states followed by one absorbing post-exercise state. The initial
/// distribution is a point mass on the grid price nearest `s0`.
pub fn build_american_call_mdp(model: &GbmModel, contract: &OptionContract, grid: &[f64]) -> Result<StoppingMdp, PricingError> {
    contract.validate()?;
    let hold = gbm_transition_matrix(model, grid)?;
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if contract.s0 < lo || contract.s0 > hi {
        return Err(PricingError::OutsideGrid { s0: contract.s0, lo, hi });
    }
    let n = grid.len();
    let terminal = n;
    let mut states: Vec<StoppingState> = grid.iter().map(|&p| StoppingState::live(vec![p])).collect();
    states.push(StoppingState {
        prices: vec![contract.strike],
        knocked_out: false,
        absorbed: true,
    });

    let mut hold_rows: Vec<Vec<(usize, f64)>> = (0..n).map(|x| hold.row(x).collect()).collect();
    hold_rows.push(vec![(terminal, 1.0)]);
    let exercise_rows = vec![vec![(terminal, 1.0)]; n + 1];
    // indexed by EXERCISE, HOLD
    let transitions = vec![
        SparseRows::normalized(exercise_rows, n + 1)?,
        SparseRows::normalized(hold_rows, n + 1)?,
    ];

    let mut reward = vec![0.0; (n + 1) * 2];
    for (x, s) in states.iter().enumerate() {
        reward[x * 2 + EXERCISE] = contract.payoff(s);
    }
    let start = nearest_index(grid, contract.s0);
    let mut initial = vec![0.0; n + 1];
    initial[start] = 1.0;
    let mdp = SampledMdp::new(MdpParts {
        states: states.iter().map(StoppingState::encode).collect(),
        actions: ACTION_NAMES.iter().map(|a| a.to_string()).collect(),
        transitions,
        reward,
        cost: vec![0.0; (n + 1) * 2],
        cost_budget: None,
        discount: model.step_discount(),
        initial,
    })?;
    Ok(StoppingMdp::new(mdp, *model, *contract, states, start))
}

fn nearest_index(grid: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, g) in grid.iter().enumerate() {
        if (g - x).abs() < (grid[best] - x).abs() {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::HOLD;

    fn model() -> GbmModel {
        GbmModel::new(0.05, 0.2, 1.0, 100).unwrap()
    }

    #[test]
    fn grid_span() {
        let g = american_call_grid(&model(), 100.0, 200);
        assert_eq!(g.len(), 200);
        assert!((g[0] - 100.0 * (0.03f64 - 1.2).exp()).abs() < 1e-9);
        assert!((g[199] - 100.0 * (0.03f64 + 1.2).exp()).abs() < 1e-9);
    }

    #[test]
    fn mdp_shape_and_rewards() {
        let c = OptionContract::american_call(100.0, 100.0);
        let grid = vec![80.0, 100.0, 120.0];
        let sm = build_american_call_mdp(&model(), &c, &grid).unwrap();
        assert_eq!(sm.mdp.n_states(), 4);
        assert_eq!(sm.mdp.reward(2, EXERCISE), 20.0);
        assert_eq!(sm.mdp.reward(2, HOLD), 0.0);
        assert_eq!(sm.mdp.reward(3, EXERCISE), 0.0);
        assert_eq!(sm.initial_state, 1);
        assert_eq!(sm.live_states(), &[0, 1, 2]);
        assert_eq!(sm.nearest_live(&[115.0]), 2);
        assert_eq!(sm.mdp.transition(EXERCISE).row(0).collect::<Vec<_>>(), vec![(3, 1.0)]);
        assert!(matches!(
            build_american_call_mdp(&model(), &OptionContract::american_call(100.0, 200.0), &grid),
            Err(PricingError::OutsideGrid { .. })
        ));
    }
}
