//! Two-phase revised simplex on an explicit dense basis inverse.
//!
//! The input problem is rewritten as `min c·z, A z = b, z >= 0, b >= 0`:
//! finite lower bounds are shifted to zero, upper-bounded-only variables are
//! mirrored, free variables are split and finite upper bounds become extra
//! rows. Phase one minimizes the sum of artificials, phase two the real cost.
//!
//! Pricing is Dantzig's rule. After `degenerate_stall` consecutive degenerate
//! pivots the solver switches to Bland's rule until progress resumes, which
//! rules out cycling.

use serde::{Deserialize, Serialize};

use crate::certificate::residuals;
use crate::model::{DenseLp, RowSense, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// The basis became numerically singular, or the final certificate did
    /// not verify.
    NumericalFailure,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub degenerate_stall: usize,
    pub refactor_every: usize,
    /// Defaults to `max(10_000, 50 * (rows + cols))` when `None`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            pivot_tol: 1e-10,
            feasibility_tol: 1e-8,
            optimality_tol: 1e-9,
            degenerate_stall: 50,
            refactor_every: 10,
            max_iterations: None,
        }
    }
}

/// Result of a solve.
///
/// `duals[i]` is the sensitivity of the optimal objective to `rhs[i]`: for a
/// minimization `>=` rows carry nonnegative duals and `<=` rows nonpositive
/// ones; for a maximization the signs flip. `reduced_costs[j]` is
/// `objective[j] - sum_i duals[i] * A[i][j]`. The vectors are empty unless
/// the status is `Optimal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: Status,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    fn failed(status: Status, iterations: usize) -> Self {
        LpSolution {
            status,
            primal: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: f64::NAN,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

pub fn solve(lp: &DenseLp) -> LpSolution {
    solve_with(lp, &SolverOptions::default())
}

pub fn solve_with(lp: &DenseLp, opts: &SolverOptions) -> LpSolution {
    if lp.validate().is_err() {
        return LpSolution::failed(Status::NumericalFailure, 0);
    }
    let scaling = Scaling::equilibrate(lp);
    let scaled = scaling.apply(lp);
    let inner = match solve_through_dual(&scaled, opts) {
        Some(sol) => sol,
        None => solve_unscaled(&scaled, opts),
    };
    if !inner.is_optimal() {
        return inner;
    }
    let primal: Vec<f64> = inner.primal.iter().zip(&scaling.col).map(|(x, s)| x * s).collect();
    let duals: Vec<f64> = inner.duals.iter().zip(&scaling.row).map(|(y, r)| y * r).collect();
    let reduced_costs: Vec<f64> = (0..lp.n_cols())
        .map(|j| lp.objective()[j] - (0..lp.n_rows()).map(|i| duals[i] * lp.coeff(i, j)).sum::<f64>())
        .collect();
    let solution = LpSolution {
        status: Status::Optimal,
        objective: lp.evaluate(&primal),
        primal,
        duals,
        reduced_costs,
        iterations: inner.iterations,
    };
    let res = residuals(lp, &solution);
    let b_scale = 1.0 + lp.rhs().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let c_scale = 1.0 + lp.objective().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if res.primal > 1e-6 * b_scale || res.dual > 1e-6 * c_scale {
        return LpSolution::failed(Status::NumericalFailure, solution.iterations);
    }
    solution
}

/// Tall problems (many more rows than columns) whose variables are all free
/// or nonnegative are solved through their dual, whose basis is only as
/// large as the column count. The primal point is then read off the dual's
/// row multipliers and the row duals off its variables. Returns `None` when
/// the shortcut does not apply or is inconclusive (a dual that is infeasible
/// leaves the primal either infeasible or unbounded), so the caller falls
/// back to the direct route.
fn solve_through_dual(lp: &DenseLp, opts: &SolverOptions) -> Option<LpSolution> {
    let (m, n) = (lp.n_rows(), lp.n_cols());
    let eligible = m > 2 * n
        && (0..n).all(|j| (lp.lower()[j] == 0.0 || lp.lower()[j] == f64::NEG_INFINITY) && lp.upper()[j] == f64::INFINITY);
    if !eligible {
        return None;
    }
    let sigma = lp.sense().sign();
    // min sigma*c.x  ->  max b.y  s.t. A^T y (= or <=) sigma*c
    let mut dual = DenseLp::new(Sense::Maximize, lp.rhs().to_vec());
    for j in 0..n {
        let sense = if lp.lower()[j] == 0.0 { RowSense::Le } else { RowSense::Eq };
        let coeffs = (0..m).map(|i| lp.coeff(i, j)).collect();
        dual.add_row(coeffs, sense, sigma * lp.objective()[j]).ok()?;
    }
    for i in 0..m {
        let (lo, hi) = match lp.row_sense(i) {
            RowSense::Ge => (0.0, f64::INFINITY),
            RowSense::Le => (f64::NEG_INFINITY, 0.0),
            RowSense::Eq => (f64::NEG_INFINITY, f64::INFINITY),
        };
        dual.set_bounds(i, lo, hi).ok()?;
    }
    let sol = solve_unscaled(&dual, opts);
    match sol.status {
        Status::Optimal => {}
        Status::Unbounded => return Some(LpSolution::failed(Status::Infeasible, sol.iterations)),
        _ => return None,
    }
    let primal = sol.duals.clone();
    let duals: Vec<f64> = sol.primal.iter().map(|y| sigma * y).collect();
    let reduced_costs = (0..n)
        .map(|j| lp.objective()[j] - (0..m).map(|i| duals[i] * lp.coeff(i, j)).sum::<f64>())
        .collect();
    let candidate = LpSolution {
        status: Status::Optimal,
        objective: lp.evaluate(&primal),
        primal,
        duals,
        reduced_costs,
        iterations: sol.iterations,
    };
    let res = residuals(lp, &candidate);
    let b_scale = 1.0 + lp.rhs().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let c_scale = 1.0 + lp.objective().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    (res.primal <= 1e-6 * b_scale && res.dual <= 1e-6 * c_scale).then_some(candidate)
}

/// Power-of-two row and column factors, so scaling itself is exact.
/// The scaled problem has `A'[i][j] = A[i][j] * row[i] * col[j]` and
/// variables `x' = x / col`.
struct Scaling {
    row: Vec<f64>,
    col: Vec<f64>,
}

impl Scaling {
    /// A few passes of geometric-mean equilibration, which pulls the
    /// nonzero magnitudes of every row and column towards one.
    fn equilibrate(lp: &DenseLp) -> Self {
        let (m, n) = (lp.n_rows(), lp.n_cols());
        let mut row = vec![1.0; m];
        let mut col = vec![1.0; n];
        let pow2 = |v: f64| 2f64.powi(v.log2().round() as i32);
        for _ in 0..4 {
            for (i, r) in row.iter_mut().enumerate() {
                let (lo, hi) = extent((0..n).map(|j| lp.coeff(i, j) * col[j]));
                if hi > 0.0 {
                    *r = pow2(1.0 / (lo * hi).sqrt());
                }
            }
            for (j, c) in col.iter_mut().enumerate() {
                let (lo, hi) = extent((0..m).map(|i| lp.coeff(i, j) * row[i]));
                if hi > 0.0 {
                    *c = pow2(1.0 / (lo * hi).sqrt());
                }
            }
        }
        Scaling { row, col }
    }

    fn apply(&self, lp: &DenseLp) -> DenseLp {
        let objective = lp.objective().iter().zip(&self.col).map(|(c, s)| c * s).collect();
        let mut out = DenseLp::new(lp.sense(), objective);
        for i in 0..lp.n_rows() {
            let coeffs = lp.row(i).iter().zip(&self.col).map(|(a, s)| a * s * self.row[i]).collect();
            out.add_row(coeffs, lp.row_sense(i), lp.rhs()[i] * self.row[i])
                .expect("scaling keeps the row shape");
        }
        for (j, s) in self.col.iter().enumerate() {
            out.set_bounds(j, lp.lower()[j] / s, lp.upper()[j] / s)
                .expect("positive scaling keeps bounds ordered");
        }
        out
    }
}

/// Smallest and largest nonzero magnitude.
fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .map(f64::abs)
        .filter(|v| *v > 0.0)
        .fold((f64::INFINITY, 0.0), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn solve_unscaled(lp: &DenseLp, opts: &SolverOptions) -> LpSolution {
    let sf = StandardForm::build(lp);
    let max_iter = opts
        .max_iterations
        .unwrap_or_else(|| (50 * (sf.m + sf.cols.len())).max(10_000));

    let mut tab = match Tableau::new(&sf, opts) {
        Some(t) => t,
        None => return LpSolution::failed(Status::NumericalFailure, 0),
    };

    // Phase one.
    if sf.n_artificial > 0 {
        let cost: Vec<f64> = sf
            .kind
            .iter()
            .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        let allowed = vec![true; sf.cols.len()];
        match tab.run(&cost, &allowed, max_iter) {
            Outcome::Optimal => {}
            // The phase-one objective is bounded below by zero.
            Outcome::Unbounded | Outcome::Singular => {
                return LpSolution::failed(Status::NumericalFailure, tab.iterations)
            }
            Outcome::IterationLimit => return LpSolution::failed(Status::IterationLimit, tab.iterations),
        }
        let infeasibility: f64 = tab
            .basis
            .iter()
            .zip(&tab.xb)
            .filter(|(&c, _)| sf.kind[c] == ColKind::Artificial)
            .map(|(_, &v)| v.max(0.0))
            .sum();
        let scale = 1.0 + sf.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if infeasibility > opts.feasibility_tol * scale {
            return LpSolution::failed(Status::Infeasible, tab.iterations);
        }
        if tab.drive_out_artificials(&sf).is_none() {
            return LpSolution::failed(Status::NumericalFailure, tab.iterations);
        }
    }

    // Phase two.
    let allowed: Vec<bool> = sf.kind.iter().map(|k| *k != ColKind::Artificial).collect();
    match tab.run(&sf.cost, &allowed, max_iter) {
        Outcome::Optimal => {}
        Outcome::Unbounded => return LpSolution::failed(Status::Unbounded, tab.iterations),
        Outcome::Singular => return LpSolution::failed(Status::NumericalFailure, tab.iterations),
        Outcome::IterationLimit => return LpSolution::failed(Status::IterationLimit, tab.iterations),
    }
    if tab.refactor().is_none() {
        return LpSolution::failed(Status::NumericalFailure, tab.iterations);
    }

    let mut z = vec![0.0; sf.cols.len()];
    for (pos, &c) in tab.basis.iter().enumerate() {
        z[c] = tab.xb[pos].max(0.0);
    }
    let primal = sf.recover_primal(&z);
    let y_int = tab.duals(&sf.cost);
    let sigma = lp.sense().sign();
    let duals: Vec<f64> = (0..lp.n_rows()).map(|i| sigma * sf.row_flip[i] * y_int[i]).collect();
    let reduced_costs: Vec<f64> = (0..lp.n_cols())
        .map(|j| lp.objective()[j] - (0..lp.n_rows()).map(|i| duals[i] * lp.coeff(i, j)).sum::<f64>())
        .collect();

    let solution = LpSolution {
        status: Status::Optimal,
        objective: lp.evaluate(&primal),
        primal,
        duals,
        reduced_costs,
        iterations: tab.iterations,
    };

    let res = residuals(lp, &solution);
    let b_scale = 1.0 + lp.rhs().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let c_scale = 1.0 + lp.objective().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if res.primal > 1e-6 * b_scale || res.dual > 1e-6 * c_scale {
        return LpSolution::failed(Status::NumericalFailure, solution.iterations);
    }
    solution
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

/// `x_orig = offset + sign * z_col` for every structural column.
struct StructMap {
    orig: usize,
    sign: f64,
}

struct StandardForm {
    m: usize,
    /// Column-major constraint matrix, each column of length `m`.
    cols: Vec<Vec<f64>>,
    cost: Vec<f64>,
    b: Vec<f64>,
    kind: Vec<ColKind>,
    structs: Vec<StructMap>,
    offsets: Vec<f64>,
    /// +1 or -1 for each standard-form row (rows were negated to make b >= 0).
    row_flip: Vec<f64>,
    /// Standard-form row whose artificial/slack seeds the initial basis.
    initial_basis: Vec<usize>,
    n_artificial: usize,
}

impl StandardForm {
    fn build(lp: &DenseLp) -> Self {
        let n = lp.n_cols();
        let sigma = lp.sense().sign();
        let mut offsets = vec![0.0; n];
        let mut structs = Vec::new();
        // (column, upper limit) pairs that need an explicit bound row.
        let mut bound_rows = Vec::new();
        for j in 0..n {
            let (lo, hi) = (lp.lower()[j], lp.upper()[j]);
            if lo.is_finite() {
                offsets[j] = lo;
                if hi.is_finite() {
                    bound_rows.push((structs.len(), hi - lo));
                }
                structs.push(StructMap { orig: j, sign: 1.0 });
            } else if hi.is_finite() {
                offsets[j] = hi;
                structs.push(StructMap { orig: j, sign: -1.0 });
            } else {
                structs.push(StructMap { orig: j, sign: 1.0 });
                structs.push(StructMap { orig: j, sign: -1.0 });
            }
        }

        let n_orig_rows = lp.n_rows();
        let m = n_orig_rows + bound_rows.len();
        let mut row_sense = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        let mut cols: Vec<Vec<f64>> = structs
            .iter()
            .map(|s| {
                let mut col = vec![0.0; m];
                for (i, entry) in col.iter_mut().enumerate().take(n_orig_rows) {
                    *entry = lp.coeff(i, s.orig) * s.sign;
                }
                col
            })
            .collect();
        for i in 0..n_orig_rows {
            let shift: f64 = lp.row(i).iter().zip(&offsets).map(|(a, o)| a * o).sum();
            b.push(lp.rhs()[i] - shift);
            row_sense.push(lp.row_sense(i));
        }
        for (r, &(col, limit)) in bound_rows.iter().enumerate() {
            cols[col][n_orig_rows + r] = 1.0;
            b.push(limit);
            row_sense.push(RowSense::Le);
        }

        let mut cost: Vec<f64> = structs
            .iter()
            .map(|s| sigma * lp.objective()[s.orig] * s.sign)
            .collect();
        let mut kind = vec![ColKind::Structural; structs.len()];

        let mut row_flip = vec![1.0; m];
        let mut slack_of_row = vec![None; m];
        for i in 0..m {
            let coef = match row_sense[i] {
                RowSense::Le => 1.0,
                RowSense::Ge => -1.0,
                RowSense::Eq => continue,
            };
            let mut col = vec![0.0; m];
            col[i] = coef;
            slack_of_row[i] = Some(cols.len());
            cols.push(col);
            cost.push(0.0);
            kind.push(ColKind::Slack);
        }
        for i in 0..m {
            if b[i] < 0.0 {
                row_flip[i] = -1.0;
                b[i] = -b[i];
                for col in cols.iter_mut() {
                    col[i] = -col[i];
                }
            }
        }

        let mut initial_basis = Vec::with_capacity(m);
        let mut n_artificial = 0;
        for i in 0..m {
            match slack_of_row[i] {
                Some(s) if cols[s][i] > 0.0 => initial_basis.push(s),
                _ => {
                    let mut col = vec![0.0; m];
                    col[i] = 1.0;
                    initial_basis.push(cols.len());
                    cols.push(col);
                    cost.push(0.0);
                    kind.push(ColKind::Artificial);
                    n_artificial += 1;
                }
            }
        }

        StandardForm {
            m,
            cols,
            cost,
            b,
            kind,
            structs,
            offsets,
            row_flip,
            initial_basis,
            n_artificial,
        }
    }

    fn recover_primal(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.offsets.clone();
        for (c, s) in self.structs.iter().enumerate() {
            x[s.orig] += s.sign * z[c];
        }
        x
    }
}

/// Relative size below which a pivot element counts as unstable.
const STABLE_PIVOT: f64 = 1e-7;
/// Entering columns tried per iteration before accepting an unstable pivot.
const MAX_CANDIDATES: usize = 20;

enum Outcome {
    Optimal,
    Unbounded,
    Singular,
    IterationLimit,
}

struct Tableau<'a> {
    sf: &'a StandardForm,
    opts: &'a SolverOptions,
    m: usize,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Row-major `m x m` inverse of the basis matrix.
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

impl<'a> Tableau<'a> {
    fn new(sf: &'a StandardForm, opts: &'a SolverOptions) -> Option<Self> {
        let m = sf.m;
        let mut in_basis = vec![false; sf.cols.len()];
        for &c in &sf.initial_basis {
            in_basis[c] = true;
        }
        let mut t = Tableau {
            sf,
            opts,
            m,
            basis: sf.initial_basis.clone(),
            in_basis,
            binv: vec![0.0; m * m],
            xb: vec![0.0; m],
            iterations: 0,
            since_refactor: 0,
        };
        t.refactor()?;
        Some(t)
    }

    /// Recomputes the basis inverse from scratch by Gauss-Jordan elimination
    /// with partial pivoting, then the basic solution.
    fn refactor(&mut self) -> Option<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (pos, &c) in self.basis.iter().enumerate() {
            for i in 0..m {
                a[i * m + pos] = self.sf.cols[c][i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for k in 0..m {
            let (p, pv) = (k..m)
                .map(|i| (i, a[i * m + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv < 1e-12 {
                return None;
            }
            if p != k {
                for j in 0..m {
                    a.swap(p * m + j, k * m + j);
                    inv.swap(p * m + j, k * m + j);
                }
            }
            let d = a[k * m + k];
            for j in 0..m {
                a[k * m + j] /= d;
                inv[k * m + j] /= d;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = a[i * m + k];
                if f == 0.0 {
                    continue;
                }
                for j in 0..m {
                    a[i * m + j] -= f * a[k * m + j];
                    inv[i * m + j] -= f * inv[k * m + j];
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&self.sf.b).map(|(x, y)| x * y).sum();
        }
        self.since_refactor = 0;
        Some(())
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (pos, &c) in self.basis.iter().enumerate() {
            let cb = cost[c];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[pos * m..(pos + 1) * m];
            for (yk, r) in y.iter_mut().zip(row) {
                *yk += cb * r;
            }
        }
        y
    }

    fn column(&self, c: usize) -> Vec<f64> {
        let m = self.m;
        let col = &self.sf.cols[c];
        (0..m)
            .map(|i| self.binv[i * m..(i + 1) * m].iter().zip(col).map(|(x, y)| x * y).sum())
            .collect()
    }

    fn pivot(&mut self, row: usize, entering: usize, alpha: &[f64]) {
        let m = self.m;
        let theta = self.xb[row].max(0.0) / alpha[row];
        for i in 0..m {
            if i != row {
                self.xb[i] -= theta * alpha[i];
            }
        }
        self.xb[row] = theta;

        let piv = alpha[row];
        for j in 0..m {
            self.binv[row * m + j] /= piv;
        }
        let (before, rest) = self.binv.split_at_mut(row * m);
        let (prow, after) = rest.split_at_mut(m);
        for (i, chunk) in before.chunks_mut(m).chain(after.chunks_mut(m)).enumerate() {
            let f = alpha[if i < row { i } else { i + 1 }];
            if f != 0.0 {
                for (v, p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }

        let leaving = self.basis[row];
        self.in_basis[leaving] = false;
        self.in_basis[entering] = true;
        self.basis[row] = entering;
        self.since_refactor += 1;
    }

    fn run(&mut self, cost: &[f64], allowed: &[bool], max_iter: usize) -> Outcome {
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= max_iter {
                return Outcome::IterationLimit;
            }
            if self.since_refactor >= self.opts.refactor_every && self.refactor().is_none() {
                return Outcome::Singular;
            }
            let bland = degenerate_run >= self.opts.degenerate_stall;
            let y = self.duals(cost);

            let mut candidates: Vec<(usize, f64)> = self
                .sf
                .cols
                .iter()
                .enumerate()
                .filter(|(c, _)| !self.in_basis[*c] && allowed[*c])
                .map(|(c, col)| (c, cost[c] - y.iter().zip(col).map(|(a, b)| a * b).sum::<f64>()))
                .filter(|(_, d)| *d < -self.opts.optimality_tol)
                .collect();
            if candidates.is_empty() {
                return Outcome::Optimal;
            }
            if !bland {
                candidates.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            }

            // A pivot much smaller than the rest of its column wrecks the
            // basis inverse, so such columns are passed over in favour of the
            // next candidate; the first one is kept as a last resort.
            let mut chosen = None;
            let mut fallback = None;
            for &(q, _) in candidates.iter().take(MAX_CANDIDATES) {
                let alpha = self.column(q);
                let Some((r, ratio)) = self.ratio_test(&alpha, bland) else {
                    return Outcome::Unbounded;
                };
                let scale = alpha.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if alpha[r] >= STABLE_PIVOT * scale {
                    chosen = Some((q, r, ratio, alpha));
                    break;
                }
                if fallback.is_none() {
                    fallback = Some((q, r, ratio, alpha));
                }
            }
            let Some((q, r, min_ratio, alpha)) = chosen.or(fallback) else {
                unreachable!("candidates is not empty")
            };

            if min_ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, q, &alpha);
            self.iterations += 1;
        }
    }

    /// Leaving row for the entering column `alpha`. Outside Bland mode this
    /// is Harris' two-pass test: the step is first bounded with every basic
    /// variable allowed a `feasibility_tol` violation, then the largest pivot
    /// under that bound is taken. Bland mode takes the exact minimum ratio
    /// and breaks ties by lowest basic column index.
    fn ratio_test(&self, alpha: &[f64], bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.pivot_tol;
        let ratio = |i: usize| self.xb[i].max(0.0) / alpha[i];
        if bland {
            let mut leave: Option<(usize, f64)> = None;
            for i in (0..self.m).filter(|&i| alpha[i] > tol) {
                let r = ratio(i);
                leave = match leave {
                    Some((l, lr)) if r > lr + 1e-12 || (r >= lr - 1e-12 && self.basis[i] > self.basis[l]) => Some((l, lr)),
                    _ => Some((i, r)),
                };
            }
            return leave;
        }
        let bound = (0..self.m)
            .filter(|&i| alpha[i] > tol)
            .map(|i| (self.xb[i].max(0.0) + self.opts.feasibility_tol) / alpha[i])
            .fold(f64::INFINITY, f64::min);
        if bound == f64::INFINITY {
            return None;
        }
        (0..self.m)
            .filter(|&i| alpha[i] > tol && ratio(i) <= bound)
            .max_by(|&a, &b| alpha[a].total_cmp(&alpha[b]).then(b.cmp(&a)))
            .map(|i| (i, ratio(i)))
    }

    /// Pivots zero-level artificials out of the basis after phase one.
    /// Artificials that cannot leave sit on redundant rows and stay at zero.
    fn drive_out_artificials(&mut self, sf: &StandardForm) -> Option<()> {
        for r in 0..self.m {
            if sf.kind[self.basis[r]] != ColKind::Artificial {
                continue;
            }
            let m = self.m;
            let mut best: Option<(usize, f64)> = None;
            for (c, col) in sf.cols.iter().enumerate() {
                if self.in_basis[c] || sf.kind[c] == ColKind::Artificial {
                    continue;
                }
                let v: f64 = self.binv[r * m..(r + 1) * m].iter().zip(col).map(|(a, b)| a * b).sum();
                if v.abs() > 1e-7 && best.is_none_or(|(_, bv)| v.abs() > bv.abs()) {
                    best = Some((c, v));
                }
            }
            if let Some((c, _)) = best {
                let alpha = self.column(c);
                self.xb[r] = 0.0;
                self.pivot(r, c, &alpha);
            }
        }
        self.refactor()
    }
}
