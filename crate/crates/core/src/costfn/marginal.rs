use std::collections::HashMap;

use crate::model::game::CooperativeGame;
use crate::reachlp::StateActionLayout;
use crate::tolerances::LOG_FLOOR;

/// Key of one marginal entry: joint observation, member agent states, member action code.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarginalKey {
    pub obs: usize,
    pub states: Vec<u32>,
    pub action: u32,
}

/// Grouping of layout columns into `(o, l^c, a^c)` entries and `(o, l^c)` rows
/// for a set of member agents.
#[derive(Debug, Clone)]
pub struct MarginalMap {
    pub members: Vec<usize>,
    pub var_to_marg: Vec<u32>,
    pub marg_to_row: Vec<u32>,
    /// Dense observation id of each row.
    pub row_obs: Vec<u32>,
    pub keys: Vec<MarginalKey>,
    /// Sum of member transition entropies for each column.
    pub var_trans_entropy: Vec<f64>,
}

impl MarginalMap {
    /// `obs_id[k]` is the dense observation id of layout state `k`.
    pub fn new(game: &CooperativeGame, layout: &StateActionLayout, obs_id: &[u32], members: &[usize]) -> Self {
        let agents = game.agents();
        let radix: Vec<usize> = members.iter().map(|&j| agents[j].num_actions()).collect();
        let mut marg_of: HashMap<MarginalKey, u32> = HashMap::new();
        let mut row_of: HashMap<(usize, Vec<u32>), u32> = HashMap::new();
        let mut keys = Vec::new();
        let mut marg_to_row = Vec::new();
        let mut row_obs = Vec::new();
        let mut var_to_marg = vec![0u32; layout.num_vars()];
        let mut var_trans_entropy = vec![0.0; layout.num_vars()];
        for (k, &s) in layout.states.iter().enumerate() {
            let o = game.obs(s).expect("layout states are never the sink");
            let locals = game.locals(s);
            let states: Vec<u32> = members.iter().map(|&j| locals[j]).collect();
            let row = *row_of.entry((o, states.clone())).or_insert_with(|| {
                row_obs.push(obs_id[k]);
                (row_obs.len() - 1) as u32
            });
            for v in layout.range(k) {
                let digits = game.decode_action(layout.codes[v]);
                let mut code = 0u32;
                let mut h = 0.0;
                for (idx, &j) in members.iter().enumerate() {
                    code = code * radix[idx] as u32 + digits[j] as u32;
                    h += agents[j].transition_entropy(locals[j] as usize, digits[j]);
                }
                var_trans_entropy[v] = h;
                let key = MarginalKey { obs: o, states: states.clone(), action: code };
                let m = *marg_of.entry(key.clone()).or_insert_with(|| {
                    keys.push(key);
                    marg_to_row.push(row);
                    (keys.len() - 1) as u32
                });
                var_to_marg[v] = m;
            }
        }
        Self { members: members.to_vec(), var_to_marg, marg_to_row, row_obs, keys, var_trans_entropy }
    }

    pub fn num_marginals(&self) -> usize {
        self.keys.len()
    }

    pub fn num_rows(&self) -> usize {
        self.row_obs.len()
    }

    /// Marginal occupancies `y` and row totals `Y`.
    pub fn sums(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut y = vec![0.0; self.num_marginals()];
        for (v, &m) in self.var_to_marg.iter().enumerate() {
            y[m as usize] += x[v];
        }
        let mut rows = vec![0.0; self.num_rows()];
        for (m, &r) in self.marg_to_row.iter().enumerate() {
            rows[r as usize] += y[m];
        }
        (y, rows)
    }

    /// Adds `-sum y log(y / Y)` of each observation to `per_obs`.
    pub fn add_conditional_entropy(&self, y: &[f64], rows: &[f64], per_obs: &mut [f64]) {
        for (m, &ym) in y.iter().enumerate() {
            if ym > 0.0 {
                let r = self.marg_to_row[m] as usize;
                per_obs[self.row_obs[r] as usize] -= ym * smoothed_ln(ym / rows[r]);
            }
        }
    }

    /// `-log(y/Y)` for each column's marginal; rows without mass count as deterministic.
    pub fn neg_log_conditional(&self, y: &[f64], rows: &[f64]) -> Vec<f64> {
        let per_marg: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(m, &ym)| {
                let total = rows[self.marg_to_row[m] as usize];
                if total > 0.0 {
                    -smoothed_ln(ym / total)
                } else {
                    0.0
                }
            })
            .collect();
        self.var_to_marg.iter().map(|&m| per_marg[m as usize]).collect()
    }
}

pub fn smoothed_ln(q: f64) -> f64 {
    q.max(LOG_FLOOR).ln()
}
