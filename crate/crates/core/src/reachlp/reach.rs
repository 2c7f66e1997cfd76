use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::game::{CooperativeGame, ReachAvoidSpec};
use crate::reachlp::lp::{LinearProgram, LpStatus, Relation, Sense};
use crate::reachlp::simplex::SimplexEngine;

/// Index map between LP columns and `(joint state, joint action)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateActionLayout {
    /// Joint states that carry variables, ascending.
    pub states: Vec<usize>,
    /// Column range of `states[k]` is `ptr[k]..ptr[k + 1]`.
    pub ptr: Vec<usize>,
    /// Joint action code of each column.
    pub codes: Vec<u32>,
    /// Position of the column's action in `game.actions(s)`; `u32::MAX` for a disabled action.
    pub positions: Vec<u32>,
    /// Game state -> index into `states`, `usize::MAX` if absent.
    pub index_of: Vec<usize>,
}

impl StateActionLayout {
    /// One column per enabled action of every state in `states`.
    pub fn enabled(game: &CooperativeGame, states: Vec<usize>) -> Self {
        Self::build(game, states, false)
    }

    /// One column per joint action code (disabled ones included) of every state in `states`.
    pub fn all_codes(game: &CooperativeGame, states: Vec<usize>) -> Self {
        Self::build(game, states, true)
    }

    fn build(game: &CooperativeGame, states: Vec<usize>, all: bool) -> Self {
        let mut ptr = vec![0];
        let mut codes = Vec::new();
        let mut positions = Vec::new();
        let mut index_of = vec![usize::MAX; game.num_states()];
        for (k, &s) in states.iter().enumerate() {
            index_of[s] = k;
            if all {
                for code in 0..game.num_joint_actions() as u32 {
                    codes.push(code);
                    positions.push(game.action_position(s, code).map(|p| p as u32).unwrap_or(u32::MAX));
                }
            } else {
                for (p, e) in game.actions(s).iter().enumerate() {
                    codes.push(e.code);
                    positions.push(p as u32);
                }
            }
            ptr.push(codes.len());
        }
        Self { states, ptr, codes, positions, index_of }
    }

    pub fn num_vars(&self) -> usize {
        self.codes.len()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn range(&self, k: usize) -> std::ops::Range<usize> {
        self.ptr[k]..self.ptr[k + 1]
    }

    pub fn is_enabled(&self, v: usize) -> bool {
        self.positions[v] != u32::MAX
    }

    /// Iterates `(column, state index k, game state, successors)` over enabled columns.
    pub fn for_each_column<'g>(
        &self,
        game: &'g CooperativeGame,
        mut f: impl FnMut(usize, usize, usize, &'g [(u32, f64)]),
    ) {
        for (k, &s) in self.states.iter().enumerate() {
            let actions = game.actions(s);
            for v in self.range(k) {
                if self.positions[v] != u32::MAX {
                    f(v, k, s, game.successors(&actions[self.positions[v] as usize]));
                }
            }
        }
    }
}

/// Non-terminal states reachable from the initial state along non-terminal
/// paths and from which some target state is reachable. Everything else has
/// reach-avoid value zero or is never visited.
pub fn working_states(game: &CooperativeGame, spec: &ReachAvoidSpec) -> Vec<usize> {
    let n = game.num_states();
    let live = |s: usize| !spec.is_terminal(s) && Some(s) != game.sink();
    let mut forward = vec![false; n];
    let init = game.init();
    if live(init) {
        forward[init] = true;
        let mut queue = VecDeque::from([init]);
        while let Some(s) = queue.pop_front() {
            for e in game.actions(s) {
                for &(u, _) in game.successors(e) {
                    let u = u as usize;
                    if live(u) && !forward[u] {
                        forward[u] = true;
                        queue.push_back(u);
                    }
                }
            }
        }
    }
    let coreach = can_reach_target(game, spec, &forward);
    (0..n).filter(|&s| forward[s] && coreach[s]).collect()
}

/// States in `within` that have a path to a target state through `within`.
fn can_reach_target(game: &CooperativeGame, spec: &ReachAvoidSpec, within: &[bool]) -> Vec<bool> {
    let n = game.num_states();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    for s in 0..n {
        if !within[s] {
            continue;
        }
        for e in game.actions(s) {
            for &(u, _) in game.successors(e) {
                preds[u as usize].push(s as u32);
            }
        }
    }
    let mut hit = vec![false; n];
    let mut queue: VecDeque<usize> = spec.target().iter().copied().collect();
    let mut seen = vec![false; n];
    for &t in spec.target() {
        seen[t] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &p in &preds[u] {
            let p = p as usize;
            if !seen[p] {
                seen[p] = true;
                hit[p] = true;
                queue.push_back(p);
            }
        }
    }
    hit
}

/// Probability of stepping straight into the target set.
pub fn target_mass(spec: &ReachAvoidSpec, succ: &[(u32, f64)]) -> f64 {
    succ.iter().filter(|&&(u, _)| spec.is_target(u as usize)).map(|&(_, p)| p).sum()
}

/// Flow rows `sum_a x_{s,a} - inflow(s) = 1{s = init}` for every state in the layout.
pub fn flow_rows(game: &CooperativeGame, layout: &StateActionLayout) -> Vec<(Vec<(usize, f64)>, f64)> {
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); layout.num_states()];
    for k in 0..layout.num_states() {
        for v in layout.range(k) {
            rows[k].push((v, 1.0));
        }
    }
    layout.for_each_column(game, |v, _, _, succ| {
        for &(u, p) in succ {
            let ku = layout.index_of[u as usize];
            if ku != usize::MAX {
                rows[ku].push((v, -p));
            }
        }
    });
    rows.into_iter()
        .enumerate()
        .map(|(k, r)| (r, if layout.states[k] == game.init() { 1.0 } else { 0.0 }))
        .collect()
}

/// Largest absolute flow-conservation residual of `x` over the layout's states.
pub fn flow_residual(game: &CooperativeGame, layout: &StateActionLayout, x: &[f64]) -> f64 {
    flow_rows(game, layout)
        .iter()
        .map(|(row, rhs)| (row.iter().map(|&(v, c)| c * x[v]).sum::<f64>() - rhs).abs())
        .fold(0.0, f64::max)
}

/// One column per layout state forming a proper policy: each picks an action
/// that moves closer to the target with positive probability. Its flow basis
/// is nonsingular and primal feasible.
pub fn proper_policy_columns(game: &CooperativeGame, spec: &ReachAvoidSpec, layout: &StateActionLayout) -> Vec<usize> {
    let k_n = layout.num_states();
    let mut dist = vec![usize::MAX; k_n];
    let mut choice = vec![usize::MAX; k_n];
    let mut frontier_changed = true;
    let d_of = |u: usize, dist: &[usize]| -> usize {
        if spec.is_target(u) {
            0
        } else {
            match layout.index_of[u] {
                usize::MAX => usize::MAX,
                k => dist[k],
            }
        }
    };
    // Bellman-Ford style sweeps over hop distance
    while frontier_changed {
        frontier_changed = false;
        layout.for_each_column(game, |v, k, _, succ| {
            let best = succ.iter().map(|&(u, _)| d_of(u as usize, &dist)).min().unwrap_or(usize::MAX);
            if best != usize::MAX && best + 1 < dist[k] {
                dist[k] = best + 1;
                choice[k] = v;
                frontier_changed = true;
            }
        });
    }
    choice.into_iter().filter(|&v| v != usize::MAX).collect()
}

/// Stage-1 occupancy LP: maximize the probability of entering the target set.
pub fn assemble_reach_lp(game: &CooperativeGame, spec: &ReachAvoidSpec) -> (LinearProgram, StateActionLayout) {
    let layout = StateActionLayout::enabled(game, working_states(game, spec));
    let mut lp = LinearProgram::new(layout.num_vars(), Sense::Maximize);
    layout.for_each_column(game, |v, _, _, succ| lp.set_objective(v, target_mass(spec, succ)));
    for (row, rhs) in flow_rows(game, &layout) {
        lp.add_constraint(row, Relation::Eq, rhs);
    }
    (lp, layout)
}

#[derive(Debug, Clone)]
pub struct ReachResult {
    pub v_star: f64,
    pub layout: StateActionLayout,
    /// Optimal occupancy over the layout (empty on a short-circuit).
    pub occupancy: Vec<f64>,
    pub iterations: usize,
    pub short_circuit: Option<&'static str>,
    /// Basic columns of the optimal vertex.
    pub basis: Vec<usize>,
}

impl ReachResult {
    /// Expected number of steps before termination.
    pub fn total_occupancy(&self) -> f64 {
        self.occupancy.iter().sum()
    }
}

/// Optimal reach-avoid probability under a centralized joint policy.
pub fn optimal_reach_avoid_value(game: &CooperativeGame, spec: &ReachAvoidSpec) -> Result<ReachResult> {
    let init = game.init();
    let trivial = |v: f64, why: &'static str| ReachResult {
        v_star: v,
        layout: StateActionLayout::enabled(game, Vec::new()),
        occupancy: Vec::new(),
        iterations: 0,
        short_circuit: Some(why),
        basis: Vec::new(),
    };
    if spec.is_target(init) {
        return Ok(trivial(1.0, "initial state is a target"));
    }
    if spec.is_avoid(init) {
        return Ok(trivial(0.0, "initial state is an avoid state"));
    }
    let (lp, layout) = assemble_reach_lp(game, spec);
    if layout.index_of[init] == usize::MAX {
        return Ok(trivial(0.0, "target unreachable from the initial state"));
    }
    let mut engine = SimplexEngine::with_basis(&lp, &proper_policy_columns(game, spec, &layout))?;
    let cost: Vec<f64> = lp.objective().iter().map(|c| -c).collect();
    let mut sol = engine.minimize(&cost);
    if sol.is_optimal() {
        sol.objective_value = lp.evaluate(&sol.values);
    }
    match sol.status {
        LpStatus::Optimal => Ok(ReachResult {
            v_star: sol.objective_value.clamp(0.0, 1.0),
            layout,
            occupancy: sol.values,
            iterations: sol.iterations,
            short_circuit: None,
            basis: engine.basic_columns(),
        }),
        other => Err(Error::Lp(format!("stage-1 LP ended with status {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::agent::{AgentModel, LocalState, TransitionRow};
    use crate::model::game::build_joint_game;

    fn ls(l: usize) -> LocalState {
        LocalState { obs: 0, local: l }
    }

    /// 0 --go--> {1: p, 2: 1-p}; 1 and 2 are terminal.
    fn coin(p: f64) -> (CooperativeGame, ReachAvoidSpec) {
        let rows = vec![
            TransitionRow { state: ls(0), action: 0, next: ls(1), prob: p },
            TransitionRow { state: ls(0), action: 0, next: ls(2), prob: 1.0 - p },
            TransitionRow { state: ls(1), action: 0, next: ls(1), prob: 1.0 },
            TransitionRow { state: ls(2), action: 0, next: ls(2), prob: 1.0 },
        ];
        let a = AgentModel::new("a", 1, vec![ls(0), ls(1), ls(2)], vec!["go".into()], &rows, ls(0)).unwrap();
        let g = build_joint_game(vec![a], 0).unwrap();
        let spec = ReachAvoidSpec::new(&g, [1], [2]).unwrap();
        (g, spec)
    }

    #[test]
    fn one_step_coin() {
        let (g, spec) = coin(0.5);
        let r = optimal_reach_avoid_value(&g, &spec).unwrap();
        assert!((r.v_star - 0.5).abs() < 1e-12);
        assert!(flow_residual(&g, &r.layout, &r.occupancy) < 1e-12);
    }

    #[test]
    fn short_circuits() {
        let (g, _) = coin(0.5);
        let spec = ReachAvoidSpec::new(&g, [0], []).unwrap();
        assert_eq!(optimal_reach_avoid_value(&g, &spec).unwrap().v_star, 1.0);
        let spec = ReachAvoidSpec::new(&g, [1], [0]).unwrap();
        assert_eq!(optimal_reach_avoid_value(&g, &spec).unwrap().v_star, 0.0);
        let spec = ReachAvoidSpec::new(&g, [], [1, 2]).unwrap();
        let r = optimal_reach_avoid_value(&g, &spec).unwrap();
        assert_eq!(r.v_star, 0.0);
        assert!(r.short_circuit.is_some());
    }
}
