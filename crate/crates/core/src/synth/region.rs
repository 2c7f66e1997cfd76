use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::game::{CooperativeGame, ReachAvoidSpec};
use crate::reachlp::{
    flow_rows, optimal_reach_avoid_value, target_mass, LinearProgram, Relation, ReachResult, Sense, StateActionLayout,
};

/// Total occupancy allowed in stage 2, as a multiple of the stage-1 optimum's.
pub const OCCUPANCY_CAP_FACTOR: f64 = 20.0;

/// Feasible occupancies of stage 2 over the working states: flow
/// conservation, the reach-avoid lower bound, and (on cyclic state graphs)
/// a cap on the expected episode length.
#[derive(Debug, Clone)]
pub struct Region {
    pub layout: StateActionLayout,
    pub lp: LinearProgram,
    pub v_star: f64,
    pub threshold: f64,
    pub occupancy_cap: Option<f64>,
    /// Stage-1 optimal occupancy, a vertex of the region.
    pub start: Vec<f64>,
    pub start_basis: Vec<usize>,
    /// Per-column probability of stepping into the target.
    pub reach_coeffs: Vec<f64>,
}

impl Region {
    pub fn reach_value(&self, x: &[f64]) -> f64 {
        self.reach_coeffs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn is_empty_layout(&self) -> bool {
        self.layout.num_vars() == 0
    }
}

/// Builds the stage-2 region. `v_threshold = None` means `v*`.
pub fn assemble_feasible_region(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    v_threshold: Option<f64>,
) -> Result<Region> {
    let stage1 = optimal_reach_avoid_value(game, spec)?;
    region_from_stage1(game, spec, stage1, v_threshold)
}

pub fn region_from_stage1(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    stage1: ReachResult,
    v_threshold: Option<f64>,
) -> Result<Region> {
    let v_star = stage1.v_star;
    let threshold = v_threshold.unwrap_or(v_star);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Config(format!("threshold {threshold} outside [0, 1]")));
    }
    if threshold > v_star + 1e-9 {
        return Err(Error::InfeasibleThreshold { threshold, v_star });
    }
    let layout = stage1.layout;
    let mut reach_coeffs = vec![0.0; layout.num_vars()];
    layout.for_each_column(game, |v, _, _, succ| reach_coeffs[v] = target_mass(spec, succ));
    let mut lp = LinearProgram::new(layout.num_vars(), Sense::Minimize);
    for (row, rhs) in flow_rows(game, &layout) {
        lp.add_constraint(row, Relation::Eq, rhs);
    }
    let start = stage1.occupancy;
    let start_value: f64 = reach_coeffs.iter().zip(&start).map(|(c, v)| c * v).sum();
    // the stage-1 vertex must stay feasible at threshold = v*
    let rhs = threshold.min(start_value);
    if layout.num_vars() > 0 {
        lp.add_constraint(
            reach_coeffs.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(v, &c)| (v, c)).collect(),
            Relation::Ge,
            rhs,
        );
    }
    let occupancy_cap = if has_cycle(game, &layout) {
        let total: f64 = start.iter().sum();
        let cap = OCCUPANCY_CAP_FACTOR * total.max(1.0);
        lp.add_constraint((0..layout.num_vars()).map(|v| (v, 1.0)).collect(), Relation::Le, cap);
        Some(cap)
    } else {
        None
    };
    Ok(Region { layout, lp, v_star, threshold, occupancy_cap, start, start_basis: stage1.basis, reach_coeffs })
}

/// Whether some policy can revisit a working state.
fn has_cycle(game: &CooperativeGame, layout: &StateActionLayout) -> bool {
    let n = layout.num_states();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    layout.for_each_column(game, |_, k, _, succ| {
        for &(u, _) in succ {
            let ku = layout.index_of[u as usize];
            if ku != usize::MAX {
                adj[k].push(ku);
            }
        }
    });
    let mut indeg = vec![0usize; n];
    for list in &adj {
        for &u in list {
            indeg[u] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&k| indeg[k] == 0).collect();
    let mut seen = 0;
    while let Some(k) = stack.pop() {
        seen += 1;
        for &u in &adj[k] {
            indeg[u] -= 1;
            if indeg[u] == 0 {
                stack.push(u);
            }
        }
    }
    seen < n
}

/// Variable and constraint counts of the stage-2 program over the full
/// product of agent states, every joint action and every coalition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSize {
    pub state_action_vars: usize,
    pub comm_vars: usize,
    pub variables: usize,
    pub flow_rows: usize,
    pub coupling_rows: usize,
    pub threshold_rows: usize,
    pub constraints: usize,
    pub fixed_zero: usize,
}

/// Stage-2 program over the full product (`game` enumerated with
/// `Enumeration::FullProduct`): `x_{s,a}` for every non-terminal state and
/// every joint action code (disabled ones fixed at zero), followed by
/// `x_{o,c}` for every joint observation and coalition.
pub fn assemble_full_program(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    threshold: f64,
) -> (LinearProgram, StateActionLayout, ProblemSize) {
    let states: Vec<usize> =
        (0..game.num_states()).filter(|&s| !spec.is_terminal(s) && Some(s) != game.sink()).collect();
    let layout = StateActionLayout::all_codes(game, states);
    let n_obs = game.num_joint_obs();
    let n_coal = game.coalitions().len();
    let n_sa = layout.num_vars();
    let mut lp = LinearProgram::new(n_sa + n_obs * n_coal, Sense::Minimize);
    for v in 0..n_sa {
        if !layout.is_enabled(v) {
            lp.fix_zero(v);
        }
    }
    let flows = flow_rows(game, &layout);
    let n_flow = flows.len();
    for (row, rhs) in flows {
        lp.add_constraint(row, Relation::Eq, rhs);
    }
    for o in 0..n_obs {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (k, &s) in layout.states.iter().enumerate() {
            if game.obs(s) == Some(o) {
                row.extend(layout.range(k).filter(|&v| layout.is_enabled(v)).map(|v| (v, 1.0)));
            }
        }
        row.extend((0..n_coal).map(|c| (n_sa + o * n_coal + c, -1.0)));
        lp.add_constraint(row, Relation::Eq, 0.0);
    }
    let mut reach = Vec::new();
    layout.for_each_column(game, |v, _, _, succ| {
        let c = target_mass(spec, succ);
        if c != 0.0 {
            reach.push((v, c));
        }
    });
    lp.add_constraint(reach, Relation::Ge, threshold);
    let size = ProblemSize {
        state_action_vars: n_sa,
        comm_vars: n_obs * n_coal,
        variables: lp.num_vars(),
        flow_rows: n_flow,
        coupling_rows: n_obs,
        threshold_rows: 1,
        constraints: lp.num_constraints(),
        fixed_zero: lp.num_fixed(),
    };
    (lp, layout, size)
}
