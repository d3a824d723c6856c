//! CPLEX-style `.lp` text export, for cross-checking against external solvers.
//!
//! Variables are named `x0..`, rows `c0..`. Coefficients use Rust's shortest
//! round-trip `f64` formatting, so reading the file back reproduces the
//! problem bit for bit. Zero coefficients are omitted; an empty expression is
//! written as `0 x0`. Bound lines appear only for variables whose bounds are
//! not the default `0 <= x < +inf`.

use std::fmt::Write;

use crate::model::{DenseLp, RowSense, Sense};

fn expression(out: &mut String, coeffs: &[f64]) {
    let mut first = true;
    for (j, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        if first {
            let _ = write!(out, "{c} x{j}");
            first = false;
        } else if c < 0.0 {
            let _ = write!(out, " - {} x{j}", -c);
        } else {
            let _ = write!(out, " + {c} x{j}");
        }
    }
    if first {
        out.push_str("0 x0");
    }
}

impl DenseLp {
    pub fn to_lp_format(&self) -> String {
        let mut out = String::from("\\ dense LP export\n");
        out.push_str(match self.sense() {
            Sense::Minimize => "Minimize\n",
            Sense::Maximize => "Maximize\n",
        });
        out.push_str(" obj: ");
        expression(&mut out, self.objective());
        out.push_str("\nSubject To\n");
        for i in 0..self.n_rows() {
            let _ = write!(out, " c{i}: ");
            expression(&mut out, self.row(i));
            let op = match self.row_sense(i) {
                RowSense::Le => "<=",
                RowSense::Eq => "=",
                RowSense::Ge => ">=",
            };
            let _ = writeln!(out, " {op} {}", self.rhs()[i]);
        }
        out.push_str("Bounds\n");
        for j in 0..self.n_cols() {
            let (lo, hi) = (self.lower()[j], self.upper()[j]);
            match (lo.is_finite(), hi.is_finite()) {
                (true, false) if lo == 0.0 => {}
                (true, false) => {
                    let _ = writeln!(out, " x{j} >= {lo}");
                }
                (false, false) => {
                    let _ = writeln!(out, " x{j} free");
                }
                (false, true) => {
                    let _ = writeln!(out, " -inf <= x{j} <= {hi}");
                }
                (true, true) => {
                    let _ = writeln!(out, " {lo} <= x{j} <= {hi}");
                }
            }
        }
        out.push_str("End\n");
        out
    }
}
