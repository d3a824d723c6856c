use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// +1 for minimization, -1 for maximization.
    pub(crate) fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("row has {got} coefficients, expected {expected}")]
    RowLength { expected: usize, got: usize },
    #[error("variable index {0} out of range")]
    VariableOutOfRange(usize),
    #[error("bounds of variable {index} are inverted: {lower} > {upper}")]
    InvertedBounds { index: usize, lower: f64, upper: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
}

/// Dense linear program
///
/// `optimize objective·x  s.t.  row_i·x (<=|=|>=) rhs_i,  lower <= x <= upper`.
///
/// Lower bounds default to 0 and upper bounds to +inf. Infinite bounds are
/// expressed with `f64::NEG_INFINITY` / `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLp {
    sense: Sense,
    objective: Vec<f64>,
    /// Row-major, `n_rows * n_cols`.
    matrix: Vec<f64>,
    row_senses: Vec<RowSense>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DenseLp {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        DenseLp {
            sense,
            objective,
            matrix: Vec::new(),
            row_senses: Vec::new(),
            rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: RowSense, rhs: f64) -> Result<usize, LpError> {
        if coeffs.len() != self.n_cols() {
            return Err(LpError::RowLength {
                expected: self.n_cols(),
                got: coeffs.len(),
            });
        }
        if !rhs.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("constraint row"));
        }
        self.matrix.extend(coeffs);
        self.row_senses.push(sense);
        self.rhs.push(rhs);
        Ok(self.rhs.len() - 1)
    }

    pub fn set_bounds(&mut self, index: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if index >= self.n_cols() {
            return Err(LpError::VariableOutOfRange(index));
        }
        if lower > upper || lower.is_nan() || upper.is_nan() || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(LpError::InvertedBounds { index, lower, upper });
        }
        self.lower[index] = lower;
        self.upper[index] = upper;
        Ok(())
    }

    /// Marks a variable as free (unbounded in both directions).
    pub fn set_free(&mut self, index: usize) -> Result<(), LpError> {
        self.set_bounds(index, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Checks the structural invariants. Construction through `add_row` and
    /// `set_bounds` already enforces them; this is for deserialized values.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_cols();
        if self.matrix.len() != n * self.rhs.len() || self.row_senses.len() != self.rhs.len() {
            return Err(LpError::RowLength {
                expected: n * self.rhs.len(),
                got: self.matrix.len(),
            });
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::VariableOutOfRange(self.lower.len().max(self.upper.len())));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        if self.matrix.iter().chain(&self.rhs).any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite("constraint row"));
        }
        for j in 0..n {
            if self.lower[j] > self.upper[j] {
                return Err(LpError::InvertedBounds {
                    index: j,
                    lower: self.lower[j],
                    upper: self.upper[j],
                });
            }
        }
        Ok(())
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn n_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_cols();
        &self.matrix[i * n..(i + 1) * n]
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n_cols() + j]
    }

    pub fn row_sense(&self, i: usize) -> RowSense {
        self.row_senses[i]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Objective value of `x` in the problem's own sense.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// `row_i · x` for every row.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_rows())
            .map(|i| self.row(i).iter().zip(x).map(|(a, v)| a * v).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_row_length() {
        let mut lp = DenseLp::new(Sense::Minimize, vec![1.0, 2.0]);
        assert_eq!(
            lp.add_row(vec![1.0], RowSense::Le, 1.0),
            Err(LpError::RowLength { expected: 2, got: 1 })
        );
    }

    #[test]
    fn rejects_inverted_bounds() {
        let mut lp = DenseLp::new(Sense::Minimize, vec![1.0]);
        assert!(lp.set_bounds(0, 2.0, 1.0).is_err());
        assert!(lp.set_bounds(3, 0.0, 1.0).is_err());
        lp.set_bounds(0, -1.0, 1.0).unwrap();
        assert_eq!(lp.lower(), &[-1.0]);
    }

    #[test]
    fn rejects_nan_rows() {
        let mut lp = DenseLp::new(Sense::Minimize, vec![1.0]);
        assert!(lp.add_row(vec![f64::NAN], RowSense::Le, 1.0).is_err());
    }
}
