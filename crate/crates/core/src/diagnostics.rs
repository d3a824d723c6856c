//! Error-bound diagnostics and small-instance oracles.
//!
//! The `(1, r)` norm of a state-action table `A` is `|sum A(x,u) r(x,u)|`.
//! For MDPs whose reward and transitions do not depend on the action, a
//! state-action measure `m` induces the value-like vector
//! `J(x) = r(x) sum_u m(x,u)`; when `m` satisfies flow balance exactly, `J`
//! also solves `(I - gamma M) J = nu * r` with
//! `M[x][x'] = P(x | x') r(x) / r(x')`. [`check_value_bound`] compares
//! `||J* - J_hat||_1` against `||mu* - Phi theta||_(1,r) / (1 - gamma)` and
//! only reports the outcome: the inequality is a conjecture, not a theorem
//! this crate relies on.

use std::fmt::Write;

use aadp_lp::{solve, DenseLp, RowSense, Sense, SolverOptions, Status};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::aadp::{run_aadp, solve_with_bases, AadpConfig, AadpError};
use crate::features::{derive_seed, FeatureError, FeatureSet, FourierConfig};
use crate::mdp::{
    build_exact_lp, build_reduced_primal_lp, occupancy_of_policy, truncation_horizon, MdpError, MdpParts,
    SampledMdp, SparseRows, StochasticPolicy,
};

/// Largest instance [`occupancy_equivalence_test`] accepts.
pub const ORACLE_MAX_STATES: usize = 6;
pub const ORACLE_MAX_ACTIONS: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("table has {got} entries, reward table has {expected}")]
    Shape { expected: usize, got: usize },
    #[error("reward depends on the action in state {0}")]
    ActionDependentReward(usize),
    #[error("transitions depend on the action")]
    ActionDependentTransitions,
    #[error("reward is zero in state {0}")]
    ZeroReward(usize),
    #[error("linear system I - gamma M is singular")]
    Singular,
    #[error("direct and solved J_hat differ by {0} for a flow-feasible measure")]
    Disagreement(f64),
    #[error("exact LP ended with status {0:?}")]
    ExactLp(Status),
    #[error("policy enumeration needs an MDP without a cost budget")]
    BudgetActive,
    #[error("no solvable draw for instance {0}")]
    NoSolvableInstance(usize),
    #[error("instance too large for the oracle ({states} states, {actions} actions)")]
    TooLarge { states: usize, actions: usize },
    #[error(transparent)]
    Mdp(#[from] MdpError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Aadp(#[from] AadpError),
}

pub fn norm_1r(table: &[f64], reward: &[f64]) -> Result<f64, DiagnosticsError> {
    if table.len() != reward.len() {
        return Err(DiagnosticsError::Shape {
            expected: reward.len(),
            got: table.len(),
        });
    }
    Ok(table.iter().zip(reward).map(|(a, r)| a * r).sum::<f64>().abs())
}

/// Per-state reward of an MDP whose reward and transitions ignore the action.
fn conformant_reward(mdp: &SampledMdp) -> Result<Vec<f64>, DiagnosticsError> {
    let u = mdp.n_actions();
    let mut r = Vec::with_capacity(mdp.n_states());
    for x in 0..mdp.n_states() {
        let rx = mdp.reward(x, 0);
        if (1..u).any(|a| mdp.reward(x, a) != rx) {
            return Err(DiagnosticsError::ActionDependentReward(x));
        }
        if rx == 0.0 {
            return Err(DiagnosticsError::ZeroReward(x));
        }
        r.push(rx);
    }
    let first = mdp.transition(0).to_dense();
    for a in 1..u {
        let other = mdp.transition(a).to_dense();
        let same = first
            .iter()
            .flatten()
            .zip(other.iter().flatten())
            .all(|(p, q)| (p - q).abs() <= 1e-15);
        if !same {
            return Err(DiagnosticsError::ActionDependentTransitions);
        }
    }
    Ok(r)
}

/// Both computations of `J_hat` for a state-action measure.
#[derive(Debug, Clone, PartialEq)]
pub struct JHat {
    /// `r(x) sum_u m(x,u)`.
    pub direct: Vec<f64>,
    /// Solution of `(I - gamma M) J = nu * r`.
    pub solved: Vec<f64>,
    /// Flow-balance violation of the measure.
    pub flow_residual: f64,
}

impl JHat {
    pub fn max_gap(&self) -> f64 {
        self.direct
            .iter()
            .zip(&self.solved)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `J_hat` of the measure `measure` (state-major, e.g. `Phi theta`).
/// Fails with [`DiagnosticsError::Disagreement`] when the measure is
/// flow-feasible (residual below 1e-9) but the two computations differ by
/// more than 1e-7.
pub fn j_hat(mdp: &SampledMdp, measure: &[f64]) -> Result<JHat, DiagnosticsError> {
    let (s, u) = (mdp.n_states(), mdp.n_actions());
    if measure.len() != s * u {
        return Err(DiagnosticsError::Shape {
            expected: s * u,
            got: measure.len(),
        });
    }
    let r = conformant_reward(mdp)?;
    let direct: Vec<f64> = (0..s)
        .map(|x| r[x] * measure[x * u..(x + 1) * u].iter().sum::<f64>())
        .collect();
    let gamma = mdp.discount();
    let mut a = DMatrix::<f64>::identity(s, s);
    for prev in 0..s {
        for (next, p) in mdp.transition(0).row(prev) {
            a[(next, prev)] -= gamma * p * r[next] / r[prev];
        }
    }
    let g = DVector::from_iterator(s, (0..s).map(|x| mdp.initial()[x] * r[x]));
    let solved = a.lu().solve(&g).ok_or(DiagnosticsError::Singular)?;
    let out = JHat {
        direct,
        solved: solved.iter().copied().collect(),
        flow_residual: mdp.flow_residual(measure),
    };
    let scale = 1.0 + out.solved.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if out.flow_residual <= 1e-9 && out.max_gap() > 1e-7 * scale {
        return Err(DiagnosticsError::Disagreement(out.max_gap()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub instance_id: usize,
    pub gamma: f64,
    /// `||J* - J_hat||_1`
    pub lhs: f64,
    /// `||mu* - Phi theta||_(1,r) / (1 - gamma)`
    pub rhs: f64,
    pub holds: bool,
}

/// Evaluates both sides of the bound for the approximate measure
/// `approx = Phi theta` (unclipped, unnormalized).
pub fn check_value_bound(mdp: &SampledMdp, approx: &[f64], instance_id: usize) -> Result<BoundReport, DiagnosticsError> {
    let sol = solve(&build_exact_lp(mdp));
    if !sol.is_optimal() {
        return Err(DiagnosticsError::ExactLp(sol.status));
    }
    let optimal = j_hat(mdp, &sol.primal)?;
    let approx_j = j_hat(mdp, approx)?;
    let lhs: f64 = optimal
        .direct
        .iter()
        .zip(&approx_j.direct)
        .map(|(a, b)| (a - b).abs())
        .sum();
    let diff: Vec<f64> = sol.primal.iter().zip(approx).map(|(a, b)| a - b).collect();
    let gamma = mdp.discount();
    let rhs = norm_1r(&diff, mdp.rewards())? / (1.0 - gamma);
    Ok(BoundReport {
        instance_id,
        gamma,
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Random MDP satisfying the `J_hat` preconditions: one transition matrix
/// shared by every action and a strictly positive action-independent reward.
/// Actions differ only through their cost.
pub fn random_conformant_mdp<R: Rng>(
    rng: &mut R,
    n_states: usize,
    n_actions: usize,
    discount: f64,
) -> Result<SampledMdp, MdpError> {
    let rows: Vec<Vec<(usize, f64)>> = (0..n_states)
        .map(|_| {
            (0..n_states)
                .filter_map(|y| rng.random_bool(0.6).then(|| (y, rng.random::<f64>() + 0.05)))
                .collect()
        })
        .collect();
    let p = SparseRows::normalized(rows, n_states)?;
    let state_reward: Vec<f64> = (0..n_states).map(|_| rng.random_range(0.2..2.0)).collect();
    let reward = state_reward
        .iter()
        .flat_map(|&r| std::iter::repeat_n(r, n_actions))
        .collect();
    let cost = (0..n_states * n_actions).map(|_| rng.random::<f64>()).collect();
    let mut initial: Vec<f64> = (0..n_states).map(|_| rng.random::<f64>() + 0.1).collect();
    let total: f64 = initial.iter().sum();
    initial.iter_mut().for_each(|v| *v /= total);
    // Renormalizing in one pass can leave the sum a few ulps away from 1.
    let drift: f64 = 1.0 - initial.iter().sum::<f64>();
    initial[0] += drift;
    SampledMdp::new(MdpParts {
        states: (0..n_states).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect(),
        actions: (0..n_actions).map(|a| format!("a{a}")).collect(),
        transitions: vec![p; n_actions],
        reward,
        cost,
        cost_budget: None,
        discount,
        initial,
    })
}

/// Bound reports for `count` random conformant instances. Each instance is
/// solved with small Fourier bases; an instance whose reduced LP does not
/// solve is redrawn (at most 50 times) so every report is finite.
pub fn random_bound_reports(
    count: usize,
    n_states: usize,
    discount: f64,
    config: &AadpConfig,
    seed: u64,
) -> Result<Vec<BoundReport>, DiagnosticsError> {
    (0..count)
        .into_par_iter()
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, id as u64));
            for attempt in 0..50u64 {
                let mdp = random_conformant_mdp(&mut rng, n_states, 2, discount)?;
                let cfg = AadpConfig {
                    seed: derive_seed(config.seed, (id as u64) << 8 | attempt),
                    ..*config
                };
                let result = run_aadp(&mdp, &cfg)?;
                if result.is_solved() {
                    return check_value_bound(&mdp, &result.raw_measure, id);
                }
            }
            Err(DiagnosticsError::NoSolvableInstance(id))
        })
        .collect()
}

/// `instance_id,gamma,lhs,rhs,holds`
pub fn bound_reports_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("instance_id,gamma,lhs,rhs,holds\n");
    for r in reports {
        let _ = writeln!(out, "{},{},{},{},{}", r.instance_id, r.gamma, r.lhs, r.rhs, r.holds);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub lp_objective: f64,
    /// Reward collected by the occupancy of the policy read off `mu*`.
    pub occupancy_objective: f64,
    pub flow_residual: f64,
    pub horizon: usize,
    pub holds: bool,
}

/// Solves the occupation-measure LP, turns its optimum into the conditional
/// policy `mu*(x,u) / sum_u mu*(x,u)`, propagates that policy exactly and
/// checks that the occupancy earns the LP objective and satisfies flow
/// balance, both within 1e-6. The conditional policy coincides with the
/// greedy one at a vertex solution and stays exact when a cost row binds.
pub fn occupancy_equivalence_test(mdp: &SampledMdp) -> Result<EquivalenceReport, DiagnosticsError> {
    if mdp.n_states() > ORACLE_MAX_STATES || mdp.n_actions() > ORACLE_MAX_ACTIONS {
        return Err(DiagnosticsError::TooLarge {
            states: mdp.n_states(),
            actions: mdp.n_actions(),
        });
    }
    let sol = solve(&build_exact_lp(mdp));
    if !sol.is_optimal() {
        return Err(DiagnosticsError::ExactLp(sol.status));
    }
    let measure = crate::mdp::OccupationMeasure::new(mdp.n_states(), mdp.n_actions(), sol.primal.clone());
    let policy = StochasticPolicy::from_measure(&measure);
    let max_r = mdp.rewards().iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let horizon = truncation_horizon(mdp.discount(), max_r.max(1.0), 1e-10);
    let occ = occupancy_of_policy(mdp, &policy, horizon)?;
    let occupancy_objective = occ.objective(mdp);
    let flow_residual = mdp.flow_residual(&occ.values);
    let holds = (occupancy_objective - sol.objective).abs() <= 1e-6 && flow_residual <= 1e-6;
    Ok(EquivalenceReport {
        lp_objective: sol.objective,
        occupancy_objective,
        flow_residual,
        horizon,
        holds,
    })
}

/// Outcome of comparing the reduced LP against the reward-weighted distance
/// to the exact optimum over the same feasible set.
///
/// Only `theta >= 0` is imposed, so `Phi theta` may go negative and the
/// reduced optimum can overshoot the exact one. Over the convex feasible set
/// `sum r Phi theta` fills `[lowest, reduced]`, and the smallest distance to
/// `J*` is the gap to that interval.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionReport {
    pub exact_objective: f64,
    /// Best `sum r Phi theta`; `None` when the reduced LP is infeasible,
    /// infinite when unbounded.
    pub reduced_objective: Option<f64>,
    /// Worst `sum r Phi theta` over the same set.
    pub lowest_objective: Option<f64>,
    /// Smallest `||mu* - Phi theta||_(1,r)`.
    pub min_distance: Option<f64>,
}

impl ProjectionReport {
    /// The reduced optimum does not exceed the exact one, so maximizing the
    /// reduced objective is the same as minimizing the distance.
    pub fn undershoots(&self, tol: f64) -> bool {
        self.reduced_objective
            .is_some_and(|r| r <= self.exact_objective + tol * (1.0 + self.exact_objective.abs()))
    }

    /// The minimum distance equals the gap between `J*` and the reachable
    /// interval of reduced objectives.
    pub fn consistent(&self, tol: f64) -> bool {
        match (self.reduced_objective, self.lowest_objective, self.min_distance) {
            (Some(hi), Some(lo), Some(d)) => {
                let j = self.exact_objective;
                let gap = (j - hi).max(lo - j).max(0.0);
                (gap - d).abs() <= tol * (1.0 + j.abs())
            }
            (None, None, None) => true,
            _ => false,
        }
    }
}

/// Maximizing the reduced objective and minimizing the `(1, r)` distance to
/// the exact optimum over `{theta >= 0 : Phi theta flow-feasible}`.
pub fn projection_check(mdp: &SampledMdp, phi: &FeatureSet) -> Result<ProjectionReport, DiagnosticsError> {
    let exact = solve(&build_exact_lp(mdp));
    if !exact.is_optimal() {
        return Err(DiagnosticsError::ExactLp(exact.status));
    }
    let reduced_lp = build_reduced_primal_lp(mdp, phi)?;
    let weights = reduced_lp.objective().to_vec();
    // Same rows, optional extra column, new objective.
    let restate = |sense, objective: Vec<f64>| {
        let extra = objective.len() - weights.len();
        let mut lp = DenseLp::new(sense, objective);
        for i in 0..reduced_lp.n_rows() {
            let mut row = reduced_lp.row(i).to_vec();
            row.resize(row.len() + extra, 0.0);
            lp.add_row(row, reduced_lp.row_sense(i), reduced_lp.rhs()[i])
                .expect("row length matches");
        }
        lp
    };
    let extreme = |lp: &DenseLp, unbounded: f64| {
        let sol = solve(lp);
        match sol.status {
            Status::Optimal => Some(sol.objective),
            Status::Unbounded => Some(unbounded),
            _ => None,
        }
    };
    let highest = extreme(&reduced_lp, f64::INFINITY);
    let lowest = extreme(&restate(Sense::Minimize, weights.clone()), f64::NEG_INFINITY);

    // min t  s.t. reduced rows, t + R.theta >= J*, t - R.theta >= -J*
    let k = phi.n_features();
    let mut objective = vec![0.0; k + 1];
    objective[k] = 1.0;
    let mut lp = restate(Sense::Minimize, objective);
    let mut up = weights.clone();
    up.push(1.0);
    lp.add_row(up, RowSense::Ge, exact.objective).expect("row length matches");
    let mut down: Vec<f64> = weights.iter().map(|w| -w).collect();
    down.push(1.0);
    lp.add_row(down, RowSense::Ge, -exact.objective).expect("row length matches");
    let distance = solve(&lp);

    Ok(ProjectionReport {
        exact_objective: exact.objective,
        reduced_objective: highest,
        lowest_objective: lowest,
        min_distance: distance.is_optimal().then_some(distance.objective),
    })
}

/// Best `nu`-weighted discounted value over all deterministic stationary
/// policies, each evaluated by a dense linear solve. Only for instances the
/// oracle accepts, and only without a cost budget.
pub fn enumeration_value(mdp: &SampledMdp) -> Result<f64, DiagnosticsError> {
    let (s, u) = (mdp.n_states(), mdp.n_actions());
    if s > ORACLE_MAX_STATES || u > ORACLE_MAX_ACTIONS {
        return Err(DiagnosticsError::TooLarge { states: s, actions: u });
    }
    if mdp.cost_budget().is_some() {
        return Err(DiagnosticsError::BudgetActive);
    }
    let gamma = mdp.discount();
    let dense: Vec<Vec<Vec<f64>>> = (0..u).map(|a| mdp.transition(a).to_dense()).collect();
    let mut best = f64::NEG_INFINITY;
    let mut choice = vec![0usize; s];
    loop {
        let a = DMatrix::from_fn(s, s, |x, y| f64::from(u8::from(x == y)) - gamma * dense[choice[x]][x][y]);
        let r = DVector::from_fn(s, |x, _| mdp.reward(x, choice[x]));
        let v = a.lu().solve(&r).ok_or(DiagnosticsError::Singular)?;
        best = best.max(v.iter().zip(mdp.initial()).map(|(v, n)| v * n).sum());
        // odometer over the u^s policies
        let mut pos = 0;
        loop {
            if pos == s {
                return Ok(best);
            }
            choice[pos] += 1;
            if choice[pos] < u {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Random MDP for the oracle suite: action-dependent sparse transitions,
/// rewards in `[-1, 1]`, no cost budget, random initial distribution.
pub fn random_oracle_mdp<R: Rng>(
    rng: &mut R,
    n_states: usize,
    n_actions: usize,
    discount: f64,
) -> Result<SampledMdp, MdpError> {
    let transitions = (0..n_actions)
        .map(|_| {
            let rows = (0..n_states)
                .map(|x| {
                    let mut row: Vec<(usize, f64)> = (0..n_states)
                        .filter_map(|y| rng.random_bool(0.5).then(|| (y, rng.random::<f64>() + 0.05)))
                        .collect();
                    if row.is_empty() {
                        row.push((x, 1.0));
                    }
                    row
                })
                .collect();
            SparseRows::normalized(rows, n_states)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let reward = (0..n_states * n_actions).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut initial: Vec<f64> = (0..n_states).map(|_| rng.random::<f64>() + 0.1).collect();
    let total: f64 = initial.iter().sum();
    initial.iter_mut().for_each(|v| *v /= total);
    let drift: f64 = 1.0 - initial.iter().sum::<f64>();
    initial[0] += drift;
    SampledMdp::new(MdpParts {
        states: (0..n_states).map(|x| vec![x as f64]).collect(),
        actions: (0..n_actions).map(|a| format!("a{a}")).collect(),
        transitions,
        reward,
        cost: vec![0.0; n_states * n_actions],
        cost_budget: None,
        discount,
        initial,
    })
}

/// One instance of the small-instance oracle suite.
#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub instance: String,
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub exact_objective: f64,
    /// `None` when a cost budget makes enumeration inapplicable.
    pub enumeration_value: Option<f64>,
    pub occupancy_objective: f64,
    /// AADP objective with indicator bases on both sides.
    pub identity_objective: Option<f64>,
    pub passed: bool,
}

/// Agreement tolerance of every comparison in an [`OracleRow`].
pub const ORACLE_TOL: f64 = 1e-6;

/// Exact LP against policy enumeration, the occupancy equivalence and the
/// indicator-basis collapse of the reduced dual LP.
pub fn oracle_row(mdp: &SampledMdp, instance: impl Into<String>) -> Result<OracleRow, DiagnosticsError> {
    let equivalence = occupancy_equivalence_test(mdp)?;
    let enumeration = match enumeration_value(mdp) {
        Ok(v) => Some(v),
        Err(DiagnosticsError::BudgetActive) => None,
        Err(e) => return Err(e),
    };
    let (s, u) = (mdp.n_states(), mdp.n_actions());
    let phi = FeatureSet::state_action_indicators(s, u);
    let psi = FeatureSet::state_indicators(s);
    let identity = solve_with_bases(mdp, &phi, &psi, 0.0, &SolverOptions::default())?;
    let identity_objective = identity.objective();
    let exact = equivalence.lp_objective;
    let close = |v: f64| (v - exact).abs() <= ORACLE_TOL;
    let passed = equivalence.holds && enumeration.is_none_or(close) && identity_objective.is_some_and(close);
    Ok(OracleRow {
        instance: instance.into(),
        n_states: s,
        n_actions: u,
        gamma: mdp.discount(),
        exact_objective: exact,
        enumeration_value: enumeration,
        occupancy_objective: equivalence.occupancy_objective,
        identity_objective,
        passed,
    })
}

/// `count` random instances with 2 to 6 states, 1 to 3 actions and
/// discount alternating between 0.5 and 0.9.
pub fn oracle_suite(count: usize, seed: u64) -> Result<Vec<OracleRow>, DiagnosticsError> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let n_states = rng.random_range(2..=ORACLE_MAX_STATES);
            let n_actions = rng.random_range(1..=ORACLE_MAX_ACTIONS);
            let gamma = if i % 2 == 0 { 0.5 } else { 0.9 };
            let mdp = random_oracle_mdp(&mut rng, n_states, n_actions, gamma)?;
            oracle_row(&mdp, format!("random-{i}"))
        })
        .collect()
}

/// `instance,n_states,n_actions,gamma,exact_objective,enumeration_value,occupancy_objective,identity_objective,passed`
pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    let mut out = String::from(
        "instance,n_states,n_actions,gamma,exact_objective,enumeration_value,occupancy_objective,identity_objective,passed\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.instance,
            r.n_states,
            r.n_actions,
            r.gamma,
            r.exact_objective,
            opt(r.enumeration_value),
            r.occupancy_objective,
            opt(r.identity_objective),
            r.passed
        );
    }
    out
}

/// Default bases for [`random_bound_reports`] on instances with `n_states`
/// states: Fourier features small enough that the approximation is visible.
pub fn default_bound_config(n_states: usize, seed: u64) -> AadpConfig {
    AadpConfig {
        k: n_states,
        l: (n_states / 2).max(1),
        features: FourierConfig::default(),
        seed,
        slack: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_basics() {
        assert_eq!(norm_1r(&[0.0, 0.0], &[1.0, 5.0]).unwrap(), 0.0);
        assert_eq!(norm_1r(&[1.0, -2.0], &[3.0, 1.0]).unwrap(), 1.0);
        assert_eq!(norm_1r(&[-1.0, 2.0], &[3.0, 1.0]).unwrap(), 1.0);
        assert!(norm_1r(&[1.0], &[1.0, 2.0]).is_err());
    }

    fn one_state(reward: f64) -> SampledMdp {
        SampledMdp::new(MdpParts {
            states: vec![vec![0.0]],
            actions: vec!["a".into()],
            transitions: vec![SparseRows::from_dense(&[vec![1.0]])],
            reward: vec![reward],
            cost: vec![0.0],
            cost_budget: None,
            discount: 0.5,
            initial: vec![1.0],
        })
        .unwrap()
    }

    #[test]
    fn scalar_j_hat() {
        let j = j_hat(&one_state(1.0), &[2.0]).unwrap();
        assert!((j.solved[0] - 2.0).abs() < 1e-15);
        assert!((j.direct[0] - 2.0).abs() < 1e-15);
        assert_eq!(j_hat(&one_state(0.0), &[2.0]), Err(DiagnosticsError::ZeroReward(0)));
    }

    #[test]
    fn exact_measure_has_zero_bound_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mdp = random_conformant_mdp(&mut rng, 4, 2, 0.8).unwrap();
        let sol = solve(&build_exact_lp(&mdp));
        let report = check_value_bound(&mdp, &sol.primal, 0).unwrap();
        assert!(report.lhs.abs() < 1e-9 && report.rhs.abs() < 1e-9);
    }

    #[test]
    fn equivalence_rejects_large_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mdp = random_conformant_mdp(&mut rng, 7, 2, 0.5).unwrap();
        assert!(matches!(
            occupancy_equivalence_test(&mdp),
            Err(DiagnosticsError::TooLarge { .. })
        ));
    }

    #[test]
    fn csv_header() {
        let csv = bound_reports_csv(&[BoundReport {
            instance_id: 3,
            gamma: 0.9,
            lhs: 0.5,
            rhs: 1.0,
            holds: true,
        }]);
        assert_eq!(csv, "instance_id,gamma,lhs,rhs,holds\n3,0.9,0.5,1,true\n");
    }

    #[test]
    fn enumeration_on_a_two_state_choice() {
        // stay in state 0 for reward 1 per step, or jump to state 1 worth 3 per step
        let p_stay = SparseRows::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let p_jump = SparseRows::from_dense(&[vec![0.0, 1.0], vec![0.0, 1.0]]);
        let mdp = SampledMdp::new(MdpParts {
            states: vec![vec![0.0], vec![1.0]],
            actions: vec!["stay".into(), "jump".into()],
            transitions: vec![p_stay, p_jump],
            reward: vec![1.0, 0.0, 3.0, 3.0],
            cost: vec![0.0; 4],
            cost_budget: None,
            discount: 0.5,
            initial: vec![1.0, 0.0],
        })
        .unwrap();
        // jump now: 0 + 0.5 * 3 / (1 - 0.5) = 3 beats staying forever (2)
        assert!((enumeration_value(&mdp).unwrap() - 3.0).abs() < 1e-12);
        let row = oracle_row(&mdp, "choice").unwrap();
        assert!(row.passed, "{row:?}");
    }

    #[test]
    fn oracle_suite_passes() {
        let rows = oracle_suite(8, 11).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
        assert!(oracle_csv(&rows).starts_with("instance,n_states"));
    }
}
