use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::costfn::{CostBreakdown, CostModel};
use crate::error::Result;
use crate::model::coalition::Coalition;
use crate::model::game::{CooperativeGame, ReachAvoidSpec, SINK_ACTION};
use crate::synth::{extract_policy, PolicyPair, Row};
use crate::tolerances::BOUND_SLACK;

use super::chain::{induce_full_chain, induce_restricted_chain};
use super::solve::{reach_avoid_probability, state_action_occupancy, state_occupancy, visited_layout};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub p_full: f64,
    pub p_restricted: f64,
    pub d_value: f64,
    pub bound: f64,
    pub satisfied: bool,
    /// `bound + slack - (p_full - p_restricted)`
    pub margin: f64,
}

pub fn loss_bound(d: f64) -> f64 {
    (1.0 - (-d.max(0.0)).exp()).sqrt()
}

impl BoundCheck {
    pub fn new(p_full: f64, p_restricted: f64, d_value: f64) -> Self {
        let bound = loss_bound(d_value);
        let margin = bound + BOUND_SLACK - (p_full - p_restricted);
        Self { p_full, p_restricted, d_value, bound, satisfied: margin >= 0.0, margin }
    }
}

/// Occupancies of the pair's full chain with their layout and cost model.
pub struct PairOccupancy {
    pub model: CostModel,
    pub layout: crate::reachlp::StateActionLayout,
    pub x: Vec<f64>,
    pub comm: Vec<f64>,
}

pub fn pair_occupancy(game: &CooperativeGame, spec: &ReachAvoidSpec, pair: &PolicyPair) -> Result<PairOccupancy> {
    let full = induce_full_chain(game, spec, pair)?;
    let nu = state_occupancy(&full.chain)?;
    let layout = visited_layout(game, spec, &nu);
    let x = state_action_occupancy(&layout, pair, &nu);
    let model = CostModel::with_coalitions(game, &layout, pair.coalitions.clone());
    let mass = model.obs_mass(&x);
    let comm = model
        .obs_codes()
        .iter()
        .zip(&mass)
        .flat_map(|(&o, &m)| pair.comm[o].iter().map(move |w| m * w))
        .collect();
    Ok(PairOccupancy { model, layout, x, comm })
}

/// Closed-form cost of a pair, from the occupancies of its full chain.
pub fn pair_dbar(game: &CooperativeGame, spec: &ReachAvoidSpec, pair: &PolicyPair) -> Result<CostBreakdown> {
    let occ = pair_occupancy(game, spec, pair)?;
    Ok(occ.model.breakdown(&occ.x, &occ.comm))
}

/// Builds a complete pair (with marginal conditionals) from an action
/// policy indexed by state and a communication policy indexed by observation.
pub fn complete_pair(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    action: Vec<Row>,
    comm: Vec<Vec<f64>>,
    coalitions: Vec<Coalition>,
) -> Result<PolicyPair> {
    let n = game.num_agents();
    let draft = PolicyPair {
        agent_conditionals: vec![Default::default(); n],
        coalition_conditionals: vec![Default::default(); coalitions.len()],
        coalitions,
        action,
        comm,
        zero_mass_states: Vec::new(),
        zero_mass_observations: Vec::new(),
    };
    let occ = pair_occupancy(game, spec, &draft)?;
    let mut pair = extract_policy(game, spec, &occ.model, &occ.layout, &occ.x, &occ.comm);
    // keep the given rows where the chain never goes
    for &s in &pair.zero_mass_states {
        pair.action[s] = draft.action[s].clone();
    }
    for &o in &pair.zero_mass_observations {
        pair.comm[o] = draft.comm[o].clone();
    }
    Ok(pair)
}

/// Pair with random action rows over each state's enabled actions and
/// random communication rows over all coalitions.
pub fn random_pair(rng: &mut impl Rng, game: &CooperativeGame, spec: &ReachAvoidSpec) -> Result<PolicyPair> {
    let mut simplex_row = |n: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    };
    let mut action = Vec::with_capacity(game.num_states());
    for s in 0..game.num_states() {
        let codes: Vec<u32> = game.actions(s).iter().filter(|e| !e.is_sink()).map(|e| e.code).collect();
        if game.is_terminal(s) || codes.is_empty() {
            action.push(vec![(SINK_ACTION, 1.0)]);
        } else {
            let probs = simplex_row(codes.len());
            action.push(codes.into_iter().zip(probs).collect());
        }
    }
    let nc = game.coalitions().len();
    let comm = (0..game.num_joint_obs()).map(|_| simplex_row(nc)).collect();
    complete_pair(game, spec, action, comm, game.coalitions().to_vec())
}

/// Exact reach-avoid values of both chains against the closed-form cost.
pub fn check_theorem1_bound(game: &CooperativeGame, spec: &ReachAvoidSpec, pair: &PolicyPair) -> Result<BoundCheck> {
    let d = pair_dbar(game, spec, pair)?.dbar;
    check_bound_with(game, spec, pair, d)
}

pub fn check_bound_with(game: &CooperativeGame, spec: &ReachAvoidSpec, pair: &PolicyPair, d: f64) -> Result<BoundCheck> {
    let p_full = reach_avoid_probability(&induce_full_chain(game, spec, pair)?.chain)?;
    let p_restricted = reach_avoid_probability(&induce_restricted_chain(game, spec, pair)?.chain)?;
    Ok(BoundCheck::new(p_full, p_restricted, d))
}
