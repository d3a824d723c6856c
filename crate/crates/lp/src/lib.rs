//! A self-contained dense linear-programming solver.
//!
//! The solver is a two-phase revised simplex method working on an explicit
//! basis inverse. It is meant for problems with tens to a few thousand rows
//! and columns, where exact dual multipliers matter more than raw speed.
//!
//! ```
//! use aadp_lp::{DenseLp, RowSense, Sense, Status};
//!
//! let mut lp = DenseLp::new(Sense::Maximize, vec![1.0]);
//! lp.add_row(vec![1.0], RowSense::Le, 3.0).unwrap();
//! let sol = aadp_lp::solve(&lp);
//! assert_eq!(sol.status, Status::Optimal);
//! assert!((sol.objective - 3.0).abs() < 1e-12);
//! assert!((sol.duals[0] - 1.0).abs() < 1e-12);
//! ```

mod certificate;
mod format;
mod model;
mod simplex;

pub use certificate::{residuals, Residuals};
pub use model::{DenseLp, LpError, RowSense, Sense};
pub use simplex::{solve, solve_with, LpSolution, SolverOptions, Status};
