use crate::model::{DenseLp, RowSense};
use crate::simplex::LpSolution;

/// Optimality certificate residuals of a solution, measured on the original
/// problem. All residuals are absolute and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// Largest row or bound violation of the primal point.
    pub primal: f64,
    /// Largest sign violation of the row duals and reduced costs.
    pub dual: f64,
    /// Largest `|dual| * slack` product over rows and variables.
    pub complementarity: f64,
    /// Objective of the dual problem built from `duals` and `reduced_costs`,
    /// in the primal's sense. Equals the primal objective at optimality.
    pub dual_objective: f64,
}

pub fn residuals(lp: &DenseLp, sol: &LpSolution) -> Residuals {
    let x = &sol.primal;
    let sigma = lp.sense().sign();
    let activity = lp.row_activity(x);

    let mut primal = 0.0f64;
    let mut dual = 0.0f64;
    let mut complementarity = 0.0f64;
    let mut dual_obj = 0.0;

    for i in 0..lp.n_rows() {
        let b = lp.rhs()[i];
        let a = activity[i];
        // Work in minimization form: y' = sigma * y.
        let y = sigma * sol.duals[i];
        let (viol, wrong_sign) = match lp.row_sense(i) {
            RowSense::Le => ((a - b).max(0.0), y.max(0.0)),
            RowSense::Ge => ((b - a).max(0.0), (-y).max(0.0)),
            RowSense::Eq => ((a - b).abs(), 0.0),
        };
        primal = primal.max(viol);
        dual = dual.max(wrong_sign);
        complementarity = complementarity.max(y.abs() * (a - b).abs());
        dual_obj += y * b;
    }

    for j in 0..lp.n_cols() {
        let (lo, hi) = (lp.lower()[j], lp.upper()[j]);
        primal = primal.max((lo - x[j]).max(0.0)).max((x[j] - hi).max(0.0));
        let d = sigma * sol.reduced_costs[j];
        if d > 0.0 {
            if lo.is_finite() {
                complementarity = complementarity.max(d * (x[j] - lo).abs());
                dual_obj += d * lo;
            } else {
                dual = dual.max(d);
            }
        } else if d < 0.0 {
            if hi.is_finite() {
                complementarity = complementarity.max(-d * (hi - x[j]).abs());
                dual_obj += d * hi;
            } else {
                dual = dual.max(-d);
            }
        }
    }

    Residuals {
        primal,
        dual,
        complementarity,
        dual_objective: sigma * dual_obj,
    }
}
