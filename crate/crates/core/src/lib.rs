//! Approximate linear programming for sampled constrained MDPs.
//!
//! The occupation measure is approximated in the span of random Fourier
//! state-action features and the value function in the span of state
//! features. The resulting LP has one row per state-action feature and one
//! column per state feature (plus one for the cost budget); the policy is
//! read off the duals of its rows.
//!
//! ```
//! use aadp_core::aadp::{run_aadp, AadpConfig};
//! use aadp_core::mdp::{MdpParts, SampledMdp, SparseRows};
//!
//! // Two states, "stay" or "move"; only state 1 pays.
//! let stay = SparseRows::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
//! let swap = SparseRows::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
//! let mdp = SampledMdp::new(MdpParts {
//!     states: vec![vec![0.0], vec![1.0]],
//!     actions: vec!["stay".into(), "move".into()],
//!     transitions: vec![stay, swap],
//!     reward: vec![0.0, 0.0, 1.0, 0.0],
//!     cost: vec![0.0; 4],
//!     cost_budget: None,
//!     discount: 0.9,
//!     initial: vec![1.0, 0.0],
//! })
//! .unwrap();
//! let result = run_aadp(&mdp, &AadpConfig { k: 4, l: 2, ..AadpConfig::default() }).unwrap();
//! assert!(result.is_solved());
//! ```

pub mod aadp;
pub mod diagnostics;
pub mod features;
pub mod mdp;
pub mod pricing;
