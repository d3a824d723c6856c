mod common;

use aadp_core::aadp::solve_with_bases;
use aadp_core::diagnostics::{occupancy_equivalence_test, oracle_suite, ORACLE_TOL};
use aadp_core::features::FeatureSet;
use aadp_core::mdp::build_exact_lp;
use aadp_lp::{solve, SolverOptions};
use aadp_testkit::{best_policy_by_enumeration, random_mdp, value_iteration, TabularMdp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::to_sampled;

/// Fifty instances with at most six states and three actions, discount
/// alternating between 0.5 and 0.9.
fn instances() -> Vec<TabularMdp> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..50)
        .map(|i| {
            let s = rng.random_range(1..=6);
            let u = rng.random_range(1..=3);
            random_mdp(&mut rng, s, u, if i % 2 == 0 { 0.5 } else { 0.9 })
        })
        .collect()
}

#[test]
fn exact_lp_matches_policy_enumeration() {
    for (i, t) in instances().iter().enumerate() {
        let sol = solve(&build_exact_lp(&to_sampled(t)));
        assert!(sol.is_optimal(), "instance {i}: {:?}", sol.status);
        let (best, _) = best_policy_by_enumeration(t);
        assert!((sol.objective - best).abs() <= ORACLE_TOL, "instance {i}: lp {} enumeration {best}", sol.objective);
    }
}

#[test]
fn lp_duals_are_the_optimal_values() {
    for (i, t) in instances().iter().enumerate() {
        let sol = solve(&build_exact_lp(&to_sampled(t)));
        let v = value_iteration(t, 1e-12);
        for (x, (d, vx)) in sol.duals.iter().zip(&v).enumerate() {
            assert!((d - vx).abs() <= 1e-6, "instance {i} state {x}: dual {d} value {vx}");
        }
    }
}

#[test]
fn occupancy_of_the_recovered_policy_earns_the_lp_value() {
    for (i, t) in instances().iter().enumerate() {
        let report = occupancy_equivalence_test(&to_sampled(t)).unwrap();
        assert!(report.holds, "instance {i}: {report:?}");
    }
}

#[test]
fn indicator_bases_collapse_to_the_exact_lp() {
    for (i, t) in instances().iter().enumerate() {
        let mdp = to_sampled(t);
        let exact = solve(&build_exact_lp(&mdp)).objective;
        let phi = FeatureSet::state_action_indicators(t.n_states(), t.n_actions());
        let psi = FeatureSet::state_indicators(t.n_states());
        let result = solve_with_bases(&mdp, &phi, &psi, 0.0, &SolverOptions::default()).unwrap();
        assert!(result.is_solved(), "instance {i}: {}", result.status.as_str());
        let obj = result.objective().unwrap();
        assert!((obj - exact).abs() <= 1e-6, "instance {i}: reduced {obj} exact {exact}");
        // Indicator rows give back the exact measure itself, so nothing is clipped.
        assert_eq!(result.clipped_mass, 0.0, "instance {i}");
    }
}

#[test]
fn library_suite_passes_on_fifty_instances() {
    let rows = oracle_suite(50, 7).unwrap();
    assert_eq!(rows.len(), 50);
    for r in &rows {
        assert!(r.passed, "{r:?}");
        assert!(r.n_states <= 6 && r.n_actions <= 3);
    }
}
