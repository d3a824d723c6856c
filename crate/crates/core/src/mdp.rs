//! Sampled constrained discounted MDPs and their occupation-measure LPs.
//!
//! Index conventions used throughout the crate: states and actions are
//! addressed by position; a state-action table is stored state-major, so
//! entry `(x, u)` lives at `x * n_actions + u`. `transition(u)` row `x` is
//! the distribution of the next state after playing `u` in `x`.

use aadp_lp::{DenseLp, RowSense, Sense};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureSet;

/// Entries below this are dropped from normalized transition rows.
pub const SPARSITY_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MdpError {
    #[error("{what}: expected {expected} entries, got {got}")]
    Dimension { what: &'static str, expected: usize, got: usize },
    #[error("the MDP needs at least one state and one action")]
    Empty,
    #[error("discount factor {0} outside [0, 1)")]
    Discount(f64),
    #[error("transition row {row} of action {action} sums to {sum}")]
    RowSum { action: usize, row: usize, sum: f64 },
    #[error("transition entry ({row}, {col}) of action {action} is {value}")]
    BadProbability { action: usize, row: usize, col: usize, value: f64 },
    #[error("initial distribution is invalid (sum {0})")]
    Initial(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("policy has no row for reachable state {0}")]
    MissingPolicyRow(usize),
    #[error("policy row {0} is not a distribution")]
    PolicyRow(usize),
}

/// Compressed sparse rows of a row-stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRows {
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRows {
    /// Stores the nonzero entries of dense rows as they are.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        Self::from_entries(
            rows.iter()
                .map(|r| r.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect())
                .collect(),
            n_cols,
        )
    }

    fn from_entries(rows: Vec<Vec<(usize, f64)>>, n_cols: usize) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            for (c, v) in row {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SparseRows { n_cols, row_ptr, col_idx, values }
    }

    /// Turns nonnegative weights (e.g. a density evaluated at grid points)
    /// into stochastic rows: normalize, drop entries below
    /// [`SPARSITY_CUTOFF`], normalize again. A row with zero total weight
    /// becomes a self-loop when square, otherwise an error is returned.
    pub fn normalized(rows: Vec<Vec<(usize, f64)>>, n_cols: usize) -> Result<Self, MdpError> {
        let mut out = Vec::with_capacity(rows.len());
        for (r, row) in rows.into_iter().enumerate() {
            if let Some(&(col, value)) = row.iter().find(|(c, v)| !v.is_finite() || *v < 0.0 || *c >= n_cols) {
                return Err(MdpError::BadProbability { action: 0, row: r, col, value });
            }
            let total: f64 = row.iter().map(|e| e.1).sum();
            if total <= 0.0 {
                if r < n_cols {
                    out.push(vec![(r, 1.0)]);
                    continue;
                }
                return Err(MdpError::RowSum { action: 0, row: r, sum: 0.0 });
            }
            let kept: Vec<(usize, f64)> = row
                .into_iter()
                .map(|(c, v)| (c, v / total))
                .filter(|e| e.1 >= SPARSITY_CUTOFF)
                .collect();
            let kept_total: f64 = kept.iter().map(|e| e.1).sum();
            out.push(kept.into_iter().map(|(c, v)| (c, v / kept_total)).collect());
        }
        Ok(Self::from_entries(out, n_cols))
    }

    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows())
            .map(|r| {
                let mut d = vec![0.0; self.n_cols];
                for (c, v) in self.row(r) {
                    d[c] += v;
                }
                d
            })
            .collect()
    }
}

/// Raw ingredients of a [`SampledMdp`], validated by [`SampledMdp::new`].
#[derive(Debug, Clone)]
pub struct MdpParts {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<String>,
    /// One matrix per action.
    pub transitions: Vec<SparseRows>,
    /// State-major `|S| x |U|` table.
    pub reward: Vec<f64>,
    /// State-major `|S| x |U|` table; all zeros when there is no budget.
    pub cost: Vec<f64>,
    /// `None` disables the cost constraint (budget `+inf`).
    pub cost_budget: Option<f64>,
    pub discount: f64,
    pub initial: Vec<f64>,
}

/// A finite sampled constrained MDP. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMdp {
    states: Vec<Vec<f64>>,
    actions: Vec<String>,
    transitions: Vec<SparseRows>,
    reward: Vec<f64>,
    cost: Vec<f64>,
    cost_budget: Option<f64>,
    discount: f64,
    initial: Vec<f64>,
}

impl SampledMdp {
    pub fn new(parts: MdpParts) -> Result<Self, MdpError> {
        let MdpParts {
            states,
            actions,
            transitions,
            reward,
            cost,
            cost_budget,
            discount,
            initial,
        } = parts;
        let (s, u) = (states.len(), actions.len());
        if s == 0 || u == 0 {
            return Err(MdpError::Empty);
        }
        let dim = |what, expected, got| {
            if expected == got {
                Ok(())
            } else {
                Err(MdpError::Dimension { what, expected, got })
            }
        };
        dim("transition matrices", u, transitions.len())?;
        dim("reward table", s * u, reward.len())?;
        dim("cost table", s * u, cost.len())?;
        dim("initial distribution", s, initial.len())?;
        let d = states[0].len();
        for st in &states {
            dim("state vector", d, st.len())?;
            if st.iter().any(|v| !v.is_finite()) {
                return Err(MdpError::NonFinite("state vector"));
            }
        }
        if reward.iter().chain(&cost).any(|v| !v.is_finite()) {
            return Err(MdpError::NonFinite("reward/cost table"));
        }
        if cost_budget.is_some_and(|c| c.is_nan()) {
            return Err(MdpError::NonFinite("cost budget"));
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(MdpError::Discount(discount));
        }
        for (a, p) in transitions.iter().enumerate() {
            dim("transition rows", s, p.n_rows())?;
            dim("transition columns", s, p.n_cols)?;
            for row in 0..s {
                let mut sum = 0.0;
                for (col, value) in p.row(row) {
                    if col >= s || !(0.0..=1.0 + 1e-12).contains(&value) {
                        return Err(MdpError::BadProbability { action: a, row, col, value });
                    }
                    sum += value;
                }
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(MdpError::RowSum { action: a, row, sum });
                }
            }
        }
        let total: f64 = initial.iter().sum();
        if initial.iter().any(|v| !(*v >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(MdpError::Initial(total));
        }
        Ok(SampledMdp {
            states,
            actions,
            transitions,
            reward,
            cost,
            cost_budget,
            discount,
            initial,
        })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn state_dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn transition(&self, action: usize) -> &SparseRows {
        &self.transitions[action]
    }

    pub fn reward(&self, x: usize, u: usize) -> f64 {
        self.reward[x * self.n_actions() + u]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    pub fn cost(&self, x: usize, u: usize) -> f64 {
        self.cost[x * self.n_actions() + u]
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    /// The active cost budget, or `None` when the constraint is disabled
    /// (no budget given, or an infinite one).
    pub fn cost_budget(&self) -> Option<f64> {
        self.cost_budget.filter(|c| c.is_finite())
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// Same MDP with a different initial distribution.
    pub fn with_initial(&self, initial: Vec<f64>) -> Result<Self, MdpError> {
        let mut parts = self.clone().into_parts();
        parts.initial = initial;
        Self::new(parts)
    }

    /// Same MDP with a different discount factor.
    pub fn with_discount(&self, discount: f64) -> Result<Self, MdpError> {
        let mut parts = self.clone().into_parts();
        parts.discount = discount;
        Self::new(parts)
    }

    pub fn into_parts(self) -> MdpParts {
        MdpParts {
            states: self.states,
            actions: self.actions,
            transitions: self.transitions,
            reward: self.reward,
            cost: self.cost,
            cost_budget: self.cost_budget,
            discount: self.discount,
            initial: self.initial,
        }
    }

    /// `out[x] = sum_{x', u'} P(x | x', u') * values(x', u')`: the mass that a
    /// state-action table sends into each state in one step.
    pub fn inflow(&self, values: &[f64]) -> Vec<f64> {
        let u_count = self.n_actions();
        let mut out = vec![0.0; self.n_states()];
        for (u, p) in self.transitions.iter().enumerate() {
            for x in 0..self.n_states() {
                let v = values[x * u_count + u];
                if v == 0.0 {
                    continue;
                }
                for (next, prob) in p.row(x) {
                    out[next] += prob * v;
                }
            }
        }
        out
    }

    /// `out[x] = sum_u values(x, u) - gamma * inflow(values)[x]`, the left
    /// side of the flow-balance equalities.
    pub fn balance(&self, values: &[f64]) -> Vec<f64> {
        let inflow = self.inflow(values);
        let u_count = self.n_actions();
        (0..self.n_states())
            .map(|x| values[x * u_count..(x + 1) * u_count].iter().sum::<f64>() - self.discount * inflow[x])
            .collect()
    }

    /// `out(x, u) = sum_{x'} P(x' | x, u) * f(x')`, expectation of a state
    /// function after one step.
    pub fn expect_next(&self, f: &[f64]) -> Vec<f64> {
        let u_count = self.n_actions();
        let mut out = vec![0.0; self.n_states() * u_count];
        for (u, p) in self.transitions.iter().enumerate() {
            for x in 0..self.n_states() {
                out[x * u_count + u] = p.row(x).map(|(n, prob)| prob * f[n]).sum();
            }
        }
        out
    }

    /// Largest flow-balance violation of a state-action measure.
    pub fn flow_residual(&self, measure: &[f64]) -> f64 {
        self.balance(measure)
            .iter()
            .zip(&self.initial)
            .map(|(b, nu)| (b - nu).abs())
            .fold(0.0, f64::max)
    }
}

/// Occupation measure over `S x U`, state-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationMeasure {
    pub n_states: usize,
    pub n_actions: usize,
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl OccupationMeasure {
    pub fn new(n_states: usize, n_actions: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), n_states * n_actions);
        OccupationMeasure {
            n_states,
            n_actions,
            values,
            normalized: false,
        }
    }

    pub fn get(&self, x: usize, u: usize) -> f64 {
        self.values[x * self.n_actions + u]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn state_mass(&self, x: usize) -> f64 {
        self.values[x * self.n_actions..(x + 1) * self.n_actions].iter().sum()
    }

    /// Rescaled to a probability measure; `None` when the total is not positive.
    pub fn normalize(&self) -> Option<Self> {
        let total = self.total();
        if !(total > 0.0) {
            return None;
        }
        Some(OccupationMeasure {
            n_states: self.n_states,
            n_actions: self.n_actions,
            values: self.values.iter().map(|v| v / total).collect(),
            normalized: true,
        })
    }

    /// `sum_{x,u} mu(x,u) r(x,u)`.
    pub fn objective(&self, mdp: &SampledMdp) -> f64 {
        self.values.iter().zip(mdp.rewards()).map(|(m, r)| m * r).sum()
    }
}

/// Conditional action distribution `pi(u | x)`. Rows may be undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticPolicy {
    n_actions: usize,
    rows: Vec<Option<Vec<f64>>>,
}

impl StochasticPolicy {
    pub fn new(n_actions: usize, rows: Vec<Option<Vec<f64>>>) -> Result<Self, MdpError> {
        for (x, row) in rows.iter().enumerate() {
            if let Some(r) = row {
                let sum: f64 = r.iter().sum();
                if r.len() != n_actions || r.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(MdpError::PolicyRow(x));
                }
            }
        }
        Ok(StochasticPolicy { n_actions, rows })
    }

    pub fn deterministic(n_actions: usize, choice: &[usize]) -> Self {
        let rows = choice
            .iter()
            .map(|&a| {
                let mut r = vec![0.0; n_actions];
                r[a] = 1.0;
                Some(r)
            })
            .collect();
        StochasticPolicy { n_actions, rows }
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        StochasticPolicy {
            n_actions,
            rows: vec![Some(vec![1.0 / n_actions as f64; n_actions]); n_states],
        }
    }

    /// `pi(u|x) = mu(x,u) / sum_u mu(x,u)`; rows with no mass become uniform.
    pub fn from_measure(measure: &OccupationMeasure) -> Self {
        let u = measure.n_actions;
        let rows = (0..measure.n_states)
            .map(|x| {
                let mass = measure.state_mass(x);
                if mass > 0.0 {
                    Some((0..u).map(|a| measure.get(x, a) / mass).collect())
                } else {
                    Some(vec![1.0 / u as f64; u])
                }
            })
            .collect();
        StochasticPolicy { n_actions: u, rows }
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, x: usize) -> Option<&[f64]> {
        self.rows.get(x).and_then(|r| r.as_deref())
    }

    pub fn prob(&self, x: usize, u: usize) -> Option<f64> {
        self.row(x).map(|r| r[u])
    }

    /// Most likely action per state (lowest index on ties).
    pub fn greedy(&self, x: usize) -> Option<usize> {
        self.row(x).map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |b, (i, &p)| if p > b.1 { (i, p) } else { b })
                .0
        })
    }
}

/// Occupation-measure LP: one variable `mu(x,u) >= 0` per state-action pair,
/// one flow-balance equality per state and, when the budget is active, one
/// cost row. Maximizes expected discounted reward.
pub fn build_exact_lp(mdp: &SampledMdp) -> DenseLp {
    let (s, u) = (mdp.n_states(), mdp.n_actions());
    let mut lp = DenseLp::new(Sense::Maximize, mdp.rewards().to_vec());
    let mut rows = vec![vec![0.0; s * u]; s];
    for x in 0..s {
        for a in 0..u {
            rows[x][x * u + a] += 1.0;
        }
    }
    for a in 0..u {
        for x in 0..s {
            for (next, p) in mdp.transition(a).row(x) {
                rows[next][x * u + a] -= mdp.discount() * p;
            }
        }
    }
    for (x, row) in rows.into_iter().enumerate() {
        lp.add_row(row, RowSense::Eq, mdp.initial()[x]).expect("row length matches");
    }
    if let Some(budget) = mdp.cost_budget() {
        lp.add_row(mdp.costs().to_vec(), RowSense::Le, budget).expect("row length matches");
    }
    lp
}

/// Variable-reduced LP: `mu = Phi theta` with `theta >= 0`; same equalities
/// and cost row as [`build_exact_lp`], expressed through the features.
pub fn build_reduced_primal_lp(mdp: &SampledMdp, phi: &FeatureSet) -> Result<DenseLp, crate::features::FeatureError> {
    phi.check_state_actions(mdp.n_states(), mdp.n_actions())?;
    let k = phi.n_features();
    let columns: Vec<Vec<f64>> = (0..k).map(|i| phi.column(i)).collect();
    let objective = columns
        .iter()
        .map(|col| col.iter().zip(mdp.rewards()).map(|(a, b)| a * b).sum())
        .collect();
    let balances: Vec<Vec<f64>> = columns.iter().map(|col| mdp.balance(col)).collect();
    let mut lp = DenseLp::new(Sense::Maximize, objective);
    for x in 0..mdp.n_states() {
        let row = balances.iter().map(|b| b[x]).collect();
        lp.add_row(row, RowSense::Eq, mdp.initial()[x]).expect("row length matches");
    }
    if let Some(budget) = mdp.cost_budget() {
        let row = columns
            .iter()
            .map(|col| col.iter().zip(mdp.costs()).map(|(a, b)| a * b).sum())
            .collect();
        lp.add_row(row, RowSense::Le, budget).expect("row length matches");
    }
    Ok(lp)
}

/// Smallest horizon `H` with `gamma^H * scale < tol`.
pub fn truncation_horizon(discount: f64, scale: f64, tol: f64) -> usize {
    if discount == 0.0 || scale == 0.0 {
        return 1;
    }
    ((tol / scale).ln() / discount.ln()).ceil().max(1.0) as usize
}

/// `sum_{t=0}^{horizon} gamma^t P(x_t = x, u_t = u)` by exact forward
/// propagation of the state distribution under `policy`.
pub fn occupancy_of_policy(
    mdp: &SampledMdp,
    policy: &StochasticPolicy,
    horizon: usize,
) -> Result<OccupationMeasure, MdpError> {
    let (s, u) = (mdp.n_states(), mdp.n_actions());
    let mut dist = mdp.initial().to_vec();
    let mut measure = vec![0.0; s * u];
    let mut weight = 1.0;
    let mut joint = vec![0.0; s * u];
    for t in 0..=horizon {
        for x in 0..s {
            if dist[x] == 0.0 {
                joint[x * u..(x + 1) * u].fill(0.0);
                continue;
            }
            let row = policy.row(x).ok_or(MdpError::MissingPolicyRow(x))?;
            for a in 0..u {
                joint[x * u + a] = dist[x] * row[a];
                measure[x * u + a] += weight * joint[x * u + a];
            }
        }
        if t == horizon {
            break;
        }
        dist.fill(0.0);
        for a in 0..u {
            for x in 0..s {
                let m = joint[x * u + a];
                if m == 0.0 {
                    continue;
                }
                for (next, p) in mdp.transition(a).row(x) {
                    dist[next] += m * p;
                }
            }
        }
        weight *= mdp.discount();
    }
    Ok(OccupationMeasure::new(s, u, measure))
}

/// JSON document form of an MDP. `cost`, `cost_budget` and `initial` are
/// optional (zero cost, no budget, uniform initial distribution).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpDocument {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<String>,
    pub transitions: Vec<TransitionDocument>,
    /// `reward[x][u]`
    pub reward: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub cost_budget: Option<f64>,
    pub discount: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDocument {
    pub action: String,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

fn flatten(table: &[Vec<f64>], what: &'static str, s: usize, u: usize) -> Result<Vec<f64>, MdpError> {
    if table.len() != s {
        return Err(MdpError::Dimension { what, expected: s, got: table.len() });
    }
    let mut out = Vec::with_capacity(s * u);
    for row in table {
        if row.len() != u {
            return Err(MdpError::Dimension { what, expected: u, got: row.len() });
        }
        out.extend_from_slice(row);
    }
    Ok(out)
}

impl TryFrom<MdpDocument> for SampledMdp {
    type Error = MdpError;

    fn try_from(doc: MdpDocument) -> Result<Self, MdpError> {
        let (s, u) = (doc.states.len(), doc.actions.len());
        let mut transitions = Vec::with_capacity(u);
        for name in &doc.actions {
            let t = doc
                .transitions
                .iter()
                .find(|t| &t.action == name)
                .ok_or(MdpError::Dimension { what: "transition matrices", expected: u, got: doc.transitions.len() })?;
            if t.row_ptr.len() != s + 1
                || t.col_idx.len() != t.values.len()
                || t.row_ptr.last() != Some(&t.values.len())
                || t.row_ptr.windows(2).any(|w| w[0] > w[1])
            {
                return Err(MdpError::Dimension { what: "CSR arrays", expected: s + 1, got: t.row_ptr.len() });
            }
            transitions.push(SparseRows {
                n_cols: s,
                row_ptr: t.row_ptr.clone(),
                col_idx: t.col_idx.clone(),
                values: t.values.clone(),
            });
        }
        let reward = flatten(&doc.reward, "reward table", s, u)?;
        let cost = match &doc.cost {
            Some(c) => flatten(c, "cost table", s, u)?,
            None => vec![0.0; s * u],
        };
        let initial = doc.initial.unwrap_or_else(|| vec![1.0 / s.max(1) as f64; s]);
        SampledMdp::new(MdpParts {
            states: doc.states,
            actions: doc.actions,
            transitions,
            reward,
            cost,
            cost_budget: doc.cost_budget,
            discount: doc.discount,
            initial,
        })
    }
}

impl From<&SampledMdp> for MdpDocument {
    fn from(mdp: &SampledMdp) -> Self {
        let u = mdp.n_actions();
        let table = |t: &[f64]| t.chunks(u).map(<[f64]>::to_vec).collect::<Vec<_>>();
        MdpDocument {
            states: mdp.states.clone(),
            actions: mdp.actions.clone(),
            transitions: mdp
                .actions
                .iter()
                .zip(&mdp.transitions)
                .map(|(a, p)| TransitionDocument {
                    action: a.clone(),
                    row_ptr: p.row_ptr.clone(),
                    col_idx: p.col_idx.clone(),
                    values: p.values.clone(),
                })
                .collect(),
            reward: table(&mdp.reward),
            cost: mdp.cost.iter().any(|c| *c != 0.0).then(|| table(&mdp.cost)),
            cost_budget: mdp.cost_budget(),
            discount: mdp.discount,
            initial: Some(mdp.initial.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn single_state(discount: f64) -> SampledMdp {
        SampledMdp::new(MdpParts {
            states: vec![vec![0.0]],
            actions: vec!["stay".into()],
            transitions: vec![SparseRows::from_dense(&[vec![1.0]])],
            reward: vec![1.0],
            cost: vec![0.0],
            cost_budget: Some(1.0),
            discount,
            initial: vec![1.0],
        })
        .unwrap()
    }

    #[test]
    fn rejects_bad_rows_and_discounts() {
        let mut parts = single_state(0.5).into_parts();
        parts.transitions = vec![SparseRows::from_dense(&[vec![0.9]])];
        assert!(matches!(SampledMdp::new(parts), Err(MdpError::RowSum { .. })));

        let mut parts = single_state(0.5).into_parts();
        parts.discount = 1.0;
        assert_eq!(SampledMdp::new(parts), Err(MdpError::Discount(1.0)));

        let mut parts = single_state(0.5).into_parts();
        parts.initial = vec![0.5];
        assert!(matches!(SampledMdp::new(parts), Err(MdpError::Initial(_))));

        let mut parts = single_state(0.5).into_parts();
        parts.reward = vec![1.0, 2.0];
        assert!(matches!(SampledMdp::new(parts), Err(MdpError::Dimension { .. })));
    }

    #[test]
    fn normalization_drops_tiny_entries() {
        let rows = SparseRows::normalized(vec![vec![(0, 1.0), (1, 1e-14), (2, 3.0)]], 3).unwrap();
        assert_eq!(rows.col_idx, vec![0, 2]);
        assert!((rows.values[0] - 0.25).abs() < 1e-15 && (rows.values[1] - 0.75).abs() < 1e-15);
        let empty = SparseRows::normalized(vec![vec![]], 1).unwrap();
        assert_eq!(empty.values, vec![1.0]);
    }

    #[test]
    fn single_state_lp_and_occupancy() {
        let mdp = single_state(0.5);
        let sol = aadp_lp::solve(&build_exact_lp(&mdp));
        assert!((sol.objective - 2.0).abs() < 1e-12);
        assert!((sol.primal[0] - 2.0).abs() < 1e-12);

        let occ = occupancy_of_policy(&mdp, &StochasticPolicy::uniform(1, 1), 60).unwrap();
        assert!((occ.values[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_reward_has_zero_objective() {
        let mut parts = single_state(0.9).into_parts();
        parts.reward = vec![0.0];
        let sol = aadp_lp::solve(&build_exact_lp(&SampledMdp::new(parts).unwrap()));
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn missing_policy_row_for_reachable_state() {
        let mdp = single_state(0.5);
        let policy = StochasticPolicy::new(1, vec![None]).unwrap();
        assert_eq!(occupancy_of_policy(&mdp, &policy, 3), Err(MdpError::MissingPolicyRow(0)));
    }

    #[test]
    fn policy_from_measure_defaults_to_uniform() {
        let m = OccupationMeasure::new(2, 2, vec![3.0, 1.0, 0.0, 0.0]);
        let p = StochasticPolicy::from_measure(&m);
        assert_eq!(p.row(0).unwrap(), &[0.75, 0.25]);
        assert_eq!(p.row(1).unwrap(), &[0.5, 0.5]);
        assert_eq!(p.greedy(0), Some(0));
    }

    #[test]
    fn truncation_horizon_meets_tolerance() {
        let h = truncation_horizon(0.9, 2.0, 1e-10);
        assert!(0.9f64.powi(h as i32) * 2.0 < 1e-10);
        assert!(0.9f64.powi(h as i32 - 1) * 2.0 >= 1e-10);
    }

    #[test]
    fn json_round_trip() {
        let mdp = single_state(0.5);
        let text = serde_json::to_string(&MdpDocument::from(&mdp)).unwrap();
        let back = SampledMdp::try_from(serde_json::from_str::<MdpDocument>(&text).unwrap()).unwrap();
        assert_eq!(back, mdp);
    }
}
