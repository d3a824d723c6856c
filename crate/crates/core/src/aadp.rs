//! The doubly-reduced LP and policy recovery.
//!
//! With state-action features `phi_1..phi_k` and state features
//! `psi_1..psi_l` the LP reads
//!
//! ```text
//! min   sum_j beta_j b_j + omega (C + slack)
//! s.t.  sum_j beta_j A_ij + omega c_i >= r_i        i = 1..k
//!       beta free, omega >= 0
//! ```
//!
//! with `b_j = sum_x psi_j(x) nu(x)`, `r_i = sum phi_i r`, `c_i = sum phi_i c`
//! and `A_ij = sum_{x,u} phi_i(x,u) (psi_j(x) - gamma E[psi_j(x') | x, u])`.
//! The multipliers `theta` of the `k` rows weight the occupation measure
//! `mu = sum_i theta_i phi_i`. The `omega` column exists only when the MDP
//! has an active cost budget.

use std::fmt::Write;

use aadp_lp::{solve_with, DenseLp, LpSolution, RowSense, Sense, SolverOptions, Status};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{derive_seed, FeatureError, FeatureSet, FourierConfig};
use crate::mdp::{OccupationMeasure, SampledMdp, StochasticPolicy};

#[derive(Debug, Error, PartialEq)]
pub enum AadpError {
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error("slack must be finite and nonnegative, got {0}")]
    Slack(f64),
    #[error("k and l must both be at least 1")]
    NoFeatures,
}

/// The assembled LP together with the coefficient blocks it was built from.
#[derive(Debug, Clone)]
pub struct ReducedDualLp {
    pub lp: DenseLp,
    pub k: usize,
    pub l: usize,
    pub has_budget: bool,
    pub slack: f64,
    /// `sum_{x,u} phi_i(x,u) r(x,u)`, the right-hand sides.
    pub reward_weights: Vec<f64>,
    /// `sum_{x,u} phi_i(x,u) c(x,u)`; empty without a budget.
    pub cost_weights: Vec<f64>,
}

impl ReducedDualLp {
    /// Column index of `omega`, when present.
    pub fn budget_column(&self) -> Option<usize> {
        self.has_budget.then_some(self.l)
    }
}

pub fn build_reduced_dual(
    mdp: &SampledMdp,
    phi: &FeatureSet,
    psi: &FeatureSet,
    slack: f64,
) -> Result<ReducedDualLp, AadpError> {
    if !(slack >= 0.0 && slack.is_finite()) {
        return Err(AadpError::Slack(slack));
    }
    let (s, u) = (mdp.n_states(), mdp.n_actions());
    phi.check_state_actions(s, u)?;
    psi.check_states(s)?;
    let (k, l) = (phi.n_features(), psi.n_features());
    let gamma = mdp.discount();

    // w_j(x, u) = psi_j(x) - gamma E[psi_j | x, u]
    let w: Vec<Vec<f64>> = (0..l)
        .into_par_iter()
        .map(|j| {
            let col = psi.column(j);
            let next = mdp.expect_next(&col);
            next.iter()
                .enumerate()
                .map(|(p, e)| col[p / u] - gamma * e)
                .collect()
        })
        .collect();
    let budget = mdp.cost_budget();
    let rows: Vec<(Vec<f64>, f64, f64)> = (0..k)
        .into_par_iter()
        .map(|i| {
            let phi_i = phi.column(i);
            let mut coeffs: Vec<f64> = w.iter().map(|wj| dot(&phi_i, wj)).collect();
            let cost = dot(&phi_i, mdp.costs());
            if budget.is_some() {
                coeffs.push(cost);
            }
            (coeffs, dot(&phi_i, mdp.rewards()), cost)
        })
        .collect();

    let mut objective: Vec<f64> = (0..l).map(|j| dot(psi.column(j).as_slice(), mdp.initial())).collect();
    if let Some(c) = budget {
        objective.push(c + slack);
    }
    let mut lp = DenseLp::new(Sense::Minimize, objective);
    for j in 0..l {
        lp.set_free(j).expect("column exists");
    }
    let mut reward_weights = Vec::with_capacity(k);
    let mut cost_weights = Vec::new();
    for (coeffs, r, c) in rows {
        lp.add_row(coeffs, RowSense::Ge, r).expect("row length matches");
        reward_weights.push(r);
        if budget.is_some() {
            cost_weights.push(c);
        }
    }
    Ok(ReducedDualLp {
        lp,
        k,
        l,
        has_budget: budget.is_some(),
        slack,
        reward_weights,
        cost_weights,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AadpStatus {
    Solved,
    LpInfeasible,
    LpUnbounded,
    LpNumericalFailure,
    LpIterationLimit,
    /// The LP solved but the recovered measure has no positive mass.
    Degenerate,
}

impl AadpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            AadpStatus::Solved => "solved",
            AadpStatus::LpInfeasible => "lp_infeasible",
            AadpStatus::LpUnbounded => "lp_unbounded",
            AadpStatus::LpNumericalFailure => "lp_numerical_failure",
            AadpStatus::LpIterationLimit => "lp_iteration_limit",
            AadpStatus::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AadpConfig {
    /// Number of state-action features.
    pub k: usize,
    /// Number of state features.
    pub l: usize,
    pub features: FourierConfig,
    pub seed: u64,
    /// Added to the cost budget in the LP objective.
    pub slack: f64,
}

impl Default for AadpConfig {
    fn default() -> Self {
        AadpConfig {
            k: 400,
            l: 100,
            features: FourierConfig::default(),
            seed: 0,
            slack: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AadpResult {
    pub status: AadpStatus,
    pub reduced: ReducedDualLp,
    pub solution: LpSolution,
    /// Multipliers of the `k` rows; empty unless the LP solved.
    pub theta: Vec<f64>,
    /// `sum_i theta_i phi_i`, before clipping.
    pub raw_measure: Vec<f64>,
    /// Total negative mass zeroed before normalization.
    pub clipped_mass: f64,
    pub measure: Option<OccupationMeasure>,
    pub policy: Option<StochasticPolicy>,
    /// Present when the features were generated by [`run_aadp`].
    pub config: Option<AadpConfig>,
    pub discount: f64,
}

impl AadpResult {
    pub fn is_solved(&self) -> bool {
        self.status == AadpStatus::Solved
    }

    /// Optimal LP objective; `None` unless the LP solved.
    pub fn objective(&self) -> Option<f64> {
        self.solution.is_optimal().then_some(self.solution.objective)
    }

    /// Rows `state,action,mu,pi` preceded by `# key=value` metadata lines.
    pub fn to_csv(&self, mdp: &SampledMdp) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# status={}", self.status.as_str());
        if let Some(cfg) = &self.config {
            let _ = writeln!(out, "# seed={}", cfg.seed);
        }
        let _ = writeln!(out, "# k={}", self.reduced.k);
        let _ = writeln!(out, "# l={}", self.reduced.l);
        let _ = writeln!(out, "# gamma={}", self.discount);
        let _ = writeln!(out, "# slack={}", self.reduced.slack);
        let _ = writeln!(out, "# clipped_mass={}", self.clipped_mass);
        match self.objective() {
            Some(v) => {
                let _ = writeln!(out, "# objective={v}");
            }
            None => out.push_str("# objective=\n"),
        }
        out.push_str("state,action,mu,pi\n");
        if let (Some(m), Some(p)) = (&self.measure, &self.policy) {
            for x in 0..m.n_states {
                for (a, name) in mdp.actions().iter().enumerate() {
                    let pi = p.prob(x, a).map_or(String::new(), |v| v.to_string());
                    let _ = writeln!(out, "{x},{name},{},{pi}", m.get(x, a));
                }
            }
        }
        out
    }
}

/// Solves the reduced LP for given bases and recovers the measure and policy.
pub fn solve_with_bases(
    mdp: &SampledMdp,
    phi: &FeatureSet,
    psi: &FeatureSet,
    slack: f64,
    options: &SolverOptions,
) -> Result<AadpResult, AadpError> {
    let reduced = build_reduced_dual(mdp, phi, psi, slack)?;
    let solution = solve_with(&reduced.lp, options);
    let mut result = AadpResult {
        status: AadpStatus::Solved,
        theta: Vec::new(),
        raw_measure: Vec::new(),
        clipped_mass: 0.0,
        measure: None,
        policy: None,
        config: None,
        discount: mdp.discount(),
        reduced,
        solution,
    };
    result.status = match result.solution.status {
        Status::Optimal => AadpStatus::Solved,
        Status::Infeasible => AadpStatus::LpInfeasible,
        Status::Unbounded => AadpStatus::LpUnbounded,
        Status::NumericalFailure => AadpStatus::LpNumericalFailure,
        Status::IterationLimit => AadpStatus::LpIterationLimit,
    };
    if !result.is_solved() {
        return Ok(result);
    }
    result.theta = result.solution.duals.clone();
    result.raw_measure = phi.combine(&result.theta);
    let mut clipped = 0.0;
    let values: Vec<f64> = result
        .raw_measure
        .iter()
        .map(|&v| {
            if v < 0.0 {
                clipped -= v;
                0.0
            } else {
                v
            }
        })
        .collect();
    result.clipped_mass = clipped;
    match OccupationMeasure::new(mdp.n_states(), mdp.n_actions(), values).normalize() {
        Some(m) => {
            result.policy = Some(StochasticPolicy::from_measure(&m));
            result.measure = Some(m);
        }
        None => result.status = AadpStatus::Degenerate,
    }
    Ok(result)
}

/// Generates Fourier bases on the MDP's states and runs the full method.
pub fn run_aadp(mdp: &SampledMdp, config: &AadpConfig) -> Result<AadpResult, AadpError> {
    run_aadp_with(mdp, config, &SolverOptions::default())
}

pub fn run_aadp_with(mdp: &SampledMdp, config: &AadpConfig, options: &SolverOptions) -> Result<AadpResult, AadpError> {
    if config.k == 0 || config.l == 0 {
        return Err(AadpError::NoFeatures);
    }
    let (phi, psi) = fourier_bases(mdp, config)?;
    let mut result = solve_with_bases(mdp, &phi, &psi, config.slack, options)?;
    result.config = Some(*config);
    Ok(result)
}

/// The state-action and state bases `run_aadp` uses for `config`.
pub fn fourier_bases(mdp: &SampledMdp, config: &AadpConfig) -> Result<(FeatureSet, FeatureSet), AadpError> {
    let phi = FeatureSet::state_action_fourier(
        mdp.states(),
        mdp.n_actions(),
        config.k,
        &config.features,
        derive_seed(config.seed, 0),
    )?;
    let psi = FeatureSet::state_fourier(mdp.states(), config.l, &config.features, derive_seed(config.seed, 1))?;
    Ok((phi, psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{MdpParts, SparseRows};

    fn one_state() -> SampledMdp {
        SampledMdp::new(MdpParts {
            states: vec![vec![0.3]],
            actions: vec!["only".into()],
            transitions: vec![SparseRows::from_dense(&[vec![1.0]])],
            reward: vec![1.0],
            cost: vec![0.0],
            cost_budget: None,
            discount: 0.5,
            initial: vec![1.0],
        })
        .unwrap()
    }

    #[test]
    fn single_action_policy_is_certain() {
        let r = run_aadp(&one_state(), &AadpConfig { k: 3, l: 2, ..AadpConfig::default() }).unwrap();
        assert!(r.is_solved(), "{:?}", r.status);
        assert_eq!(r.policy.unwrap().row(0).unwrap(), &[1.0]);
    }

    #[test]
    fn inactive_budget_drops_the_omega_column() {
        let mdp = one_state();
        let phi = FeatureSet::state_action_indicators(1, 1);
        let psi = FeatureSet::state_indicators(1);
        let red = build_reduced_dual(&mdp, &phi, &psi, 0.0).unwrap();
        assert_eq!((red.lp.n_rows(), red.lp.n_cols()), (1, 1));
        assert_eq!(red.budget_column(), None);

        let mut parts = mdp.into_parts();
        parts.cost_budget = Some(2.0);
        let red = build_reduced_dual(&SampledMdp::new(parts).unwrap(), &phi, &psi, 0.5).unwrap();
        assert_eq!(red.lp.n_cols(), 2);
        assert_eq!(red.lp.objective()[1], 2.5);
        assert_eq!(red.lp.lower()[1], 0.0);
    }

    #[test]
    fn myopic_rows_have_no_transition_term() {
        let mdp = one_state().with_discount(0.0).unwrap();
        let phi = FeatureSet::from_table(
            crate::features::FeatureDomain::StateActions { n_states: 1, n_actions: 1 },
            2,
            vec![0.5, 2.0],
        )
        .unwrap();
        let psi = FeatureSet::state_indicators(1);
        let red = build_reduced_dual(&mdp, &phi, &psi, 0.0).unwrap();
        assert_eq!(red.lp.row(0), &[0.5]);
        assert_eq!(red.lp.row(1), &[2.0]);
        assert_eq!(red.lp.rhs(), &[0.5, 2.0]);
    }

    #[test]
    fn negative_slack_is_rejected() {
        let phi = FeatureSet::state_action_indicators(1, 1);
        let psi = FeatureSet::state_indicators(1);
        assert_eq!(
            build_reduced_dual(&one_state(), &phi, &psi, -1.0).unwrap_err(),
            AadpError::Slack(-1.0)
        );
    }

    #[test]
    fn csv_layout() {
        let mdp = one_state();
        let r = solve_with_bases(
            &mdp,
            &FeatureSet::state_action_indicators(1, 1),
            &FeatureSet::state_indicators(1),
            0.0,
            &SolverOptions::default(),
        )
        .unwrap();
        let csv = r.to_csv(&mdp);
        assert!(csv.contains("# objective=2\n"));
        assert!(csv.ends_with("state,action,mu,pi\n0,only,1,1\n"));
    }
}
