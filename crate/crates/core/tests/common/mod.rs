use aadp_core::mdp::{MdpParts, SampledMdp, SparseRows};
use aadp_testkit::TabularMdp;

/// The same MDP in library form, states placed at their index on a line.
pub fn to_sampled(t: &TabularMdp) -> SampledMdp {
    let (s, u) = (t.n_states(), t.n_actions());
    SampledMdp::new(MdpParts {
        states: (0..s).map(|x| vec![x as f64]).collect(),
        actions: (0..u).map(|a| format!("a{a}")).collect(),
        transitions: t.transition.iter().map(|p| SparseRows::from_dense(p)).collect(),
        reward: t.reward.iter().flatten().copied().collect(),
        cost: vec![0.0; s * u],
        cost_budget: None,
        discount: t.discount,
        initial: t.initial.clone(),
    })
    .expect("testkit MDPs are valid")
}
