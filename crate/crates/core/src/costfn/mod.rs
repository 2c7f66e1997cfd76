//! Communication cost `d̄` of an occupancy vector, its parts and its gradient.

mod marginal;

pub use marginal::{smoothed_ln, MarginalKey, MarginalMap};

use serde::{Deserialize, Serialize};

use crate::model::coalition::Coalition;
use crate::model::game::CooperativeGame;
use crate::reachlp::StateActionLayout;

/// Parts of `d̄ = -h + sum_i g_agent[i] + sum_c g_coalition[c]` (nats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    #[serde(with = "crate::jsonfloat")]
    pub h: f64,
    #[serde(with = "crate::jsonfloat::vec")]
    pub g_agent: Vec<f64>,
    #[serde(with = "crate::jsonfloat::vec")]
    pub g_coalition: Vec<f64>,
    #[serde(with = "crate::jsonfloat")]
    pub dbar: f64,
}

/// Normalized communication weights per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionWeights {
    pub num_coalitions: usize,
    /// `w[o * num_coalitions + c]`
    pub w: Vec<f64>,
    /// Observations whose communication mass was zero (weights set uniform).
    pub zero_mass: Vec<bool>,
}

impl CoalitionWeights {
    pub fn coalition(&self, o: usize, c: usize) -> f64 {
        self.w[o * self.num_coalitions + c]
    }

    /// Weight of the coalitions that leave agent `i` out.
    pub fn agent(&self, o: usize, i: usize, coalitions: &[Coalition]) -> f64 {
        coalitions
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.contains(i))
            .map(|(c, _)| self.coalition(o, c))
            .sum()
    }
}

/// `w(o,c) = x_{o,c} / sum_d x_{o,d}`; uniform where an observation has no mass.
pub fn coalition_weights(comm: &[f64], num_coalitions: usize) -> CoalitionWeights {
    let n_obs = comm.len() / num_coalitions;
    let mut w = vec![0.0; comm.len()];
    let mut zero_mass = vec![false; n_obs];
    for o in 0..n_obs {
        let block = &comm[o * num_coalitions..(o + 1) * num_coalitions];
        let total: f64 = block.iter().sum();
        for c in 0..num_coalitions {
            w[o * num_coalitions + c] = if total > 0.0 { block[c] / total } else { 1.0 / num_coalitions as f64 };
        }
        zero_mass[o] = total <= 0.0;
    }
    CoalitionWeights { num_coalitions, w, zero_mass }
}

/// Per-observation conditional entropies and coalition costs
/// `C_c(o) = sum_{i not in c} H(A^i|o,L^i) + H(A^c|o,L^c) - H(A|o,L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsCosts {
    pub mass: Vec<f64>,
    pub h_joint: Vec<f64>,
    pub h_agent: Vec<Vec<f64>>,
    pub h_coalition: Vec<Vec<f64>>,
    /// `cost[o * num_coalitions + c]`
    pub cost: Vec<f64>,
}

/// Precomputed index maps for evaluating `d̄` over a fixed column layout.
#[derive(Debug, Clone)]
pub struct CostModel {
    n_agents: usize,
    coalitions: Vec<Coalition>,
    obs_codes: Vec<usize>,
    state_obs: Vec<u32>,
    var_obs: Vec<u32>,
    joint: MarginalMap,
    agents: Vec<MarginalMap>,
    coals: Vec<MarginalMap>,
    // excluded[c][i]
    excluded: Vec<Vec<bool>>,
}

impl CostModel {
    /// Uses the game's own coalitions.
    pub fn new(game: &CooperativeGame, layout: &StateActionLayout) -> Self {
        Self::with_coalitions(game, layout, game.coalitions().to_vec())
    }

    /// Total-correlation model: a single empty coalition, every agent weighted 1.
    pub fn total_correlation(game: &CooperativeGame, layout: &StateActionLayout) -> Self {
        Self::with_coalitions(game, layout, vec![Coalition::empty()])
    }

    pub fn with_coalitions(game: &CooperativeGame, layout: &StateActionLayout, coalitions: Vec<Coalition>) -> Self {
        let n = game.num_agents();
        let mut obs_codes: Vec<usize> = layout.states.iter().map(|&s| game.obs(s).unwrap()).collect();
        obs_codes.sort_unstable();
        obs_codes.dedup();
        let state_obs: Vec<u32> = layout
            .states
            .iter()
            .map(|&s| obs_codes.binary_search(&game.obs(s).unwrap()).unwrap() as u32)
            .collect();
        let mut var_obs = vec![0u32; layout.num_vars()];
        for k in 0..layout.num_states() {
            for v in layout.range(k) {
                var_obs[v] = state_obs[k];
            }
        }
        let all: Vec<usize> = (0..n).collect();
        let joint = MarginalMap::new(game, layout, &state_obs, &all);
        let agents = (0..n).map(|i| MarginalMap::new(game, layout, &state_obs, &[i])).collect();
        let coals = coalitions.iter().map(|c| MarginalMap::new(game, layout, &state_obs, c.members())).collect();
        let excluded = coalitions.iter().map(|c| (0..n).map(|i| !c.contains(i)).collect()).collect();
        Self { n_agents: n, coalitions, obs_codes, state_obs, var_obs, joint, agents, coals, excluded }
    }

    pub fn num_vars(&self) -> usize {
        self.var_obs.len()
    }

    pub fn num_obs(&self) -> usize {
        self.obs_codes.len()
    }

    pub fn num_agents(&self) -> usize {
        self.n_agents
    }

    pub fn num_coalitions(&self) -> usize {
        self.coalitions.len()
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    /// Joint observation code of each dense observation id.
    pub fn obs_codes(&self) -> &[usize] {
        &self.obs_codes
    }

    /// Dense observation id of each layout state.
    pub fn state_obs(&self) -> &[u32] {
        &self.state_obs
    }

    pub fn var_obs(&self) -> &[u32] {
        &self.var_obs
    }

    pub fn agent_map(&self, i: usize) -> &MarginalMap {
        &self.agents[i]
    }

    pub fn coalition_map(&self, c: usize) -> &MarginalMap {
        &self.coals[c]
    }

    pub fn joint_map(&self) -> &MarginalMap {
        &self.joint
    }

    /// Total occupancy of each observation.
    pub fn obs_mass(&self, x: &[f64]) -> Vec<f64> {
        let mut mass = vec![0.0; self.num_obs()];
        for (v, &o) in self.var_obs.iter().enumerate() {
            mass[o as usize] += x[v];
        }
        mass
    }

    pub fn evaluate(&self, x: &[f64]) -> ObsCosts {
        let n_obs = self.num_obs();
        let nc = self.num_coalitions();
        let mass = self.obs_mass(x);
        let entropy = |map: &MarginalMap| {
            let mut per = vec![0.0; n_obs];
            let (y, rows) = map.sums(x);
            map.add_conditional_entropy(&y, &rows, &mut per);
            per
        };
        let h_joint = entropy(&self.joint);
        let h_agent: Vec<Vec<f64>> = self.agents.iter().map(entropy).collect();
        let h_coalition: Vec<Vec<f64>> = self.coals.iter().map(entropy).collect();
        let mut cost = vec![0.0; n_obs * nc];
        for o in 0..n_obs {
            for c in 0..nc {
                let mut v = h_coalition[c][o] - h_joint[o];
                for i in 0..self.n_agents {
                    if self.excluded[c][i] {
                        v += h_agent[i][o];
                    }
                }
                cost[o * nc + c] = v;
            }
        }
        ObsCosts { mass, h_joint, h_agent, h_coalition, cost }
    }

    /// `sum_o sum_c w(o,c) C_c(o)`.
    pub fn value(&self, costs: &ObsCosts, w: &CoalitionWeights) -> f64 {
        costs.cost.iter().zip(&w.w).map(|(c, w)| c * w).sum()
    }

    /// `d̄(x, x_comm)` with weights normalized from the communication occupancies.
    pub fn objective(&self, x: &[f64], comm: &[f64]) -> f64 {
        self.value(&self.evaluate(x), &coalition_weights(comm, self.num_coalitions()))
    }

    /// Cheapest coalition per observation, ties to the lowest index.
    pub fn best_coalitions(&self, costs: &ObsCosts) -> Vec<usize> {
        let nc = self.num_coalitions();
        (0..self.num_obs())
            .map(|o| {
                let block = &costs.cost[o * nc..(o + 1) * nc];
                let mut best = 0;
                for c in 1..nc {
                    if block[c] < block[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }

    /// Communication occupancies putting each observation's mass on one coalition.
    pub fn concentrated_comm(&self, mass: &[f64], choice: &[usize]) -> Vec<f64> {
        let nc = self.num_coalitions();
        let mut comm = vec![0.0; mass.len() * nc];
        for (o, (&m, &c)) in mass.iter().zip(choice).enumerate() {
            comm[o * nc + c] = m;
        }
        comm
    }

    /// Communication occupancies spreading each observation's mass evenly.
    pub fn uniform_comm(&self, mass: &[f64]) -> Vec<f64> {
        let nc = self.num_coalitions();
        mass.iter().flat_map(|&m| std::iter::repeat(m / nc as f64).take(nc)).collect()
    }

    /// Gradient of the smoothed objective with respect to `x` and `x_comm`.
    pub fn gradient(&self, x: &[f64], comm: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let nc = self.num_coalitions();
        let w = coalition_weights(comm, nc);
        let nlq = |map: &MarginalMap| {
            let (y, rows) = map.sums(x);
            map.neg_log_conditional(&y, &rows)
        };
        let joint = nlq(&self.joint);
        let agents: Vec<Vec<f64>> = self.agents.iter().map(nlq).collect();
        let coals: Vec<Vec<f64>> = self.coals.iter().map(nlq).collect();
        let n_obs = self.num_obs();
        let mut wa = vec![0.0; n_obs * self.n_agents];
        for o in 0..n_obs {
            for i in 0..self.n_agents {
                wa[o * self.n_agents + i] = w.agent(o, i, &self.coalitions);
            }
        }
        let mut gx = vec![0.0; self.num_vars()];
        for (v, g) in gx.iter_mut().enumerate() {
            let o = self.var_obs[v] as usize;
            let mut s = -joint[v];
            for i in 0..self.n_agents {
                s += wa[o * self.n_agents + i] * agents[i][v];
            }
            for c in 0..nc {
                s += w.coalition(o, c) * coals[c][v];
            }
            *g = s;
        }
        let costs = self.evaluate(x);
        let mut gz = vec![0.0; n_obs * nc];
        for o in 0..n_obs {
            let total: f64 = comm[o * nc..(o + 1) * nc].iter().sum();
            if total > 0.0 {
                let block = &costs.cost[o * nc..(o + 1) * nc];
                let avg: f64 = (0..nc).map(|c| w.coalition(o, c) * block[c]).sum();
                for c in 0..nc {
                    gz[o * nc + c] = (block[c] - avg) / total;
                }
            }
        }
        (gx, gz)
    }

    /// Entropy terms with their transition parts, as reported.
    pub fn breakdown(&self, x: &[f64], comm: &[f64]) -> CostBreakdown {
        let w = coalition_weights(comm, self.num_coalitions());
        let costs = self.evaluate(x);
        let n_obs = self.num_obs();
        let trans = |map: &MarginalMap| {
            let mut per = vec![0.0; n_obs];
            for (v, &o) in self.var_obs.iter().enumerate() {
                per[o as usize] += x[v] * map.var_trans_entropy[v];
            }
            per
        };
        let h = costs.h_joint.iter().sum::<f64>() + trans(&self.joint).iter().sum::<f64>();
        let g_agent: Vec<f64> = (0..self.n_agents)
            .map(|i| {
                let t = trans(&self.agents[i]);
                (0..n_obs).map(|o| w.agent(o, i, &self.coalitions) * (costs.h_agent[i][o] + t[o])).sum()
            })
            .collect();
        let g_coalition: Vec<f64> = (0..self.num_coalitions())
            .map(|c| {
                if self.coalitions[c].is_empty() {
                    return 0.0;
                }
                let t = trans(&self.coals[c]);
                (0..n_obs).map(|o| w.coalition(o, c) * (costs.h_coalition[c][o] + t[o])).sum()
            })
            .collect();
        let dbar = -h + g_agent.iter().sum::<f64>() + g_coalition.iter().sum::<f64>();
        CostBreakdown { h, g_agent, g_coalition, dbar }
    }

    /// Closed-form entropy of the joint state-action process.
    pub fn joint_entropy(&self, x: &[f64]) -> f64 {
        self.breakdown(x, &self.uniform_comm(&self.obs_mass(x))).h
    }

    /// `x_{o,l^i,a^i}` for agent `i`.
    pub fn marginalize_agent(&self, x: &[f64], i: usize) -> Vec<(MarginalKey, f64)> {
        let map = &self.agents[i];
        let (y, _) = map.sums(x);
        map.keys.iter().cloned().zip(y).collect()
    }

    /// `x_{o,l^c,a^c}` for coalition index `c`.
    pub fn marginalize_coalition(&self, x: &[f64], c: usize) -> Vec<(MarginalKey, f64)> {
        let map = &self.coals[c];
        let (y, _) = map.sums(x);
        map.keys.iter().cloned().zip(y).collect()
    }
}

#[cfg(test)]
mod tests;
