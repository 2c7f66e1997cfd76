use std::collections::BTreeMap;

use crate::costfn::{CostModel, MarginalMap};
use crate::model::coalition::Coalition;
use crate::model::game::{CooperativeGame, ReachAvoidSpec, SINK_ACTION};
use crate::reachlp::StateActionLayout;

/// Sparse distribution over action codes.
pub type Row = Vec<(u32, f64)>;

/// Joint action policy, communication policy and the marginal conditionals
/// agents act on when they do not communicate.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyPair {
    pub coalitions: Vec<Coalition>,
    /// Indexed by joint state; terminal states hold the sink action only.
    pub action: Vec<Row>,
    /// Indexed by joint observation code, one weight per coalition.
    pub comm: Vec<Vec<f64>>,
    /// Per agent: `(observation code, agent state index) -> agent action`.
    pub agent_conditionals: Vec<BTreeMap<(usize, u32), Row>>,
    /// Per coalition: `(observation code, member states) -> member action code`.
    pub coalition_conditionals: Vec<BTreeMap<(usize, Vec<u32>), Row>>,
    /// Non-terminal states that received no occupancy (uniform action rows).
    pub zero_mass_states: Vec<usize>,
    /// Observations of non-terminal states without communication mass (uniform rows).
    pub zero_mass_observations: Vec<usize>,
}

impl PolicyPair {
    /// Largest deviation of any action or communication row sum from one.
    pub fn max_row_error(&self) -> f64 {
        let rows = self.action.iter().filter(|r| !r.is_empty()).map(|r| r.iter().map(|p| p.1).sum::<f64>());
        let comm = self.comm.iter().map(|r| r.iter().sum::<f64>());
        rows.chain(comm).map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn normalized(entries: impl Iterator<Item = (u32, f64)>) -> Option<Row> {
    let row: Row = entries.filter(|&(_, p)| p > 0.0).collect();
    let total: f64 = row.iter().map(|p| p.1).sum();
    (total > 0.0).then(|| row.into_iter().map(|(a, p)| (a, p / total)).collect())
}

fn conditionals(map: &MarginalMap, x: &[f64]) -> BTreeMap<(usize, Vec<u32>), Row> {
    let (y, _) = map.sums(x);
    let mut grouped: BTreeMap<(usize, Vec<u32>), Vec<(u32, f64)>> = BTreeMap::new();
    for (key, ym) in map.keys.iter().zip(y) {
        grouped.entry((key.obs, key.states.clone())).or_default().push((key.action, ym));
    }
    grouped
        .into_iter()
        .filter_map(|(k, entries)| {
            let mut entries = entries;
            entries.sort_by_key(|e| e.0);
            normalized(entries.into_iter()).map(|r| (k, r))
        })
        .collect()
}

/// Normalizes occupancies into a policy pair. `comm` follows the model's
/// dense observation order.
pub fn extract_policy(
    game: &CooperativeGame,
    spec: &ReachAvoidSpec,
    model: &CostModel,
    layout: &StateActionLayout,
    x: &[f64],
    comm: &[f64],
) -> PolicyPair {
    let n = game.num_states();
    let mut action = vec![Row::new(); n];
    let mut zero_mass_states = Vec::new();
    let mut live_obs = vec![false; game.num_joint_obs()];
    for (s, row) in action.iter_mut().enumerate() {
        if Some(s) == game.sink() {
            continue;
        }
        if spec.is_terminal(s) || game.is_terminal(s) {
            *row = vec![(SINK_ACTION, 1.0)];
            continue;
        }
        live_obs[game.obs(s).unwrap()] = true;
        let k = layout.index_of[s];
        let from_x = if k == usize::MAX {
            None
        } else {
            normalized(layout.range(k).filter(|&v| layout.is_enabled(v)).map(|v| (layout.codes[v], x[v])))
        };
        *row = from_x.unwrap_or_else(|| {
            zero_mass_states.push(s);
            let acts = game.actions(s);
            acts.iter().map(|e| (e.code, 1.0 / acts.len() as f64)).collect()
        });
    }
    let nc = model.num_coalitions();
    let uniform = vec![1.0 / nc as f64; nc];
    let mut comm_rows = vec![uniform.clone(); game.num_joint_obs()];
    let mut has_mass = vec![false; game.num_joint_obs()];
    for (o, &code) in model.obs_codes().iter().enumerate() {
        let block = &comm[o * nc..(o + 1) * nc];
        let total: f64 = block.iter().sum();
        if total > 0.0 {
            comm_rows[code] = block.iter().map(|v| v / total).collect();
            has_mass[code] = true;
        }
    }
    let zero_mass_observations = (0..game.num_joint_obs()).filter(|&o| live_obs[o] && !has_mass[o]).collect();
    let agent_conditionals = (0..game.num_agents())
        .map(|i| conditionals(model.agent_map(i), x).into_iter().map(|((o, st), r)| ((o, st[0]), r)).collect())
        .collect();
    let coalition_conditionals = (0..nc).map(|c| conditionals(model.coalition_map(c), x)).collect();
    PolicyPair {
        coalitions: model.coalitions().to_vec(),
        action,
        comm: comm_rows,
        agent_conditionals,
        coalition_conditionals,
        zero_mass_states,
        zero_mass_observations,
    }
}
