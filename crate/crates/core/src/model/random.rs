use rand::Rng;

use crate::error::Result;
use crate::model::agent::{AgentModel, LocalState, TransitionRow};
use crate::model::game::{build_joint_game, CooperativeGame, ReachAvoidSpec};

/// Size limits for [`random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct RandomGameParams {
    pub agents: usize,
    pub max_local_states: usize,
    pub max_public_states: usize,
    pub max_actions: usize,
    pub k: usize,
    /// Chance that a non-initial, non-target joint state is an avoid state.
    pub avoid_prob: f64,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        Self { agents: 2, max_local_states: 3, max_public_states: 2, max_actions: 2, k: 1, avoid_prob: 0.2 }
    }
}

/// Small random game whose every policy terminates almost surely.
///
/// Each agent moves forward along its states `0..n` (self-loops at most 1/2),
/// the last state is absorbing, and the target is "every agent in its last state".
pub fn random_instance(rng: &mut impl Rng, params: &RandomGameParams) -> Result<(CooperativeGame, ReachAvoidSpec)> {
    let mut agents = Vec::with_capacity(params.agents);
    for i in 0..params.agents {
        let n = rng.gen_range(2..=params.max_local_states.max(2));
        let n_obs = rng.gen_range(1..=params.max_public_states.max(1));
        let n_act = rng.gen_range(1..=params.max_actions.max(1));
        let states: Vec<LocalState> = (0..n).map(|l| LocalState { obs: rng.gen_range(0..n_obs), local: l }).collect();
        let mut rows = Vec::new();
        for j in 0..n {
            for a in 0..n_act {
                if j + 1 == n {
                    rows.push(TransitionRow { state: states[j], action: a, next: states[j], prob: 1.0 });
                    continue;
                }
                let stay = if rng.gen_bool(0.5) { rng.gen_range(0.0..0.5) } else { 0.0 };
                let first = rng.gen_range(j + 1..n);
                let second = rng.gen_range(j + 1..n);
                let split = if first != second { rng.gen_range(0.0..1.0) } else { 1.0 };
                let mut push = |next: usize, p: f64| {
                    if p > 0.0 {
                        rows.push(TransitionRow { state: states[j], action: a, next: states[next], prob: p });
                    }
                };
                push(j, stay);
                if first == second {
                    push(first, 1.0 - stay);
                } else {
                    push(first, (1.0 - stay) * split);
                    push(second, 1.0 - stay - (1.0 - stay) * split);
                }
            }
        }
        let actions = (0..n_act).map(|a| format!("a{a}")).collect();
        agents.push(AgentModel::new(format!("R{}", i + 1), n_obs, states.clone(), actions, &rows, states[0])?);
    }
    let last: Vec<usize> = agents.iter().map(|a| a.state_by_local(a.num_states() - 1).unwrap()).collect();
    let game = build_joint_game(agents, params.k)?;
    let init = game.init();
    let mut target = Vec::new();
    let mut avoid = Vec::new();
    for s in 0..game.num_states() {
        let locals = game.locals(s);
        if locals.iter().zip(&last).all(|(&l, &e)| l as usize == e) {
            target.push(s);
        } else if s != init && rng.gen_bool(params.avoid_prob) {
            avoid.push(s);
        }
    }
    let spec = ReachAvoidSpec::new(&game, target, avoid)?;
    Ok((game, spec))
}
