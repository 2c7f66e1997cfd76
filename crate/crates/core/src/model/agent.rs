use crate::error::{Error, Result};
use crate::tolerances::AGENT_ROW_SUM;

/// A local state of one agent: the public part (region) and the private part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalState {
    pub obs: usize,
    pub local: usize,
}

/// Sparse distribution over agent state indices, sorted by index.
pub type Distribution = Vec<(usize, f64)>;

/// One transition row in agent terms: `(state, action) -> next` with probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRow {
    pub state: LocalState,
    pub action: usize,
    pub next: LocalState,
    pub prob: f64,
}

/// Local MDP of a single agent over `(public observation, local state)` pairs.
///
/// States are kept sorted by `(obs, local)` so that joint states built from them
/// come out in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentModel {
    name: String,
    num_obs: usize,
    states: Vec<LocalState>,
    action_names: Vec<String>,
    // [state][action]
    transitions: Vec<Vec<Option<Distribution>>>,
    init: usize,
}

impl AgentModel {
    pub fn new(
        name: impl Into<String>,
        num_obs: usize,
        states: Vec<LocalState>,
        action_names: Vec<String>,
        rows: &[TransitionRow],
        init: LocalState,
    ) -> Result<Self> {
        let name = name.into();
        let mut states = states;
        states.sort();
        states.dedup();
        if states.is_empty() {
            return Err(Error::InvalidModel(format!("agent {name} has no states")));
        }
        if action_names.is_empty() {
            return Err(Error::InvalidModel(format!("agent {name} has no actions")));
        }
        if let Some(s) = states.iter().find(|s| s.obs >= num_obs) {
            return Err(Error::InvalidModel(format!(
                "agent {name}: observation {} out of range (num_obs = {num_obs})",
                s.obs
            )));
        }
        let lookup = |s: &LocalState| -> Result<usize> {
            states.binary_search(s).map_err(|_| {
                Error::InvalidModel(format!(
                    "agent {name}: unknown state (o={}, l={})",
                    s.obs, s.local
                ))
            })
        };
        let num_actions = action_names.len();
        let mut transitions: Vec<Vec<Option<Distribution>>> =
            vec![vec![None; num_actions]; states.len()];
        for row in rows {
            let s = lookup(&row.state)?;
            let n = lookup(&row.next)?;
            if row.action >= num_actions {
                return Err(Error::InvalidModel(format!(
                    "agent {name}: action {} out of range",
                    row.action
                )));
            }
            if !(0.0..=1.0).contains(&row.prob) || row.prob.is_nan() {
                return Err(Error::InvalidModel(format!(
                    "agent {name}: probability {} outside [0, 1]",
                    row.prob
                )));
            }
            if row.prob == 0.0 {
                continue;
            }
            let dist = transitions[s][row.action].get_or_insert_with(Vec::new);
            match dist.iter_mut().find(|(idx, _)| *idx == n) {
                Some(entry) => entry.1 += row.prob,
                None => dist.push((n, row.prob)),
            }
        }
        for (s, per_action) in transitions.iter_mut().enumerate() {
            let mut any = false;
            for (a, dist) in per_action.iter_mut().enumerate() {
                if let Some(d) = dist {
                    d.sort_by_key(|(idx, _)| *idx);
                    let total: f64 = d.iter().map(|(_, p)| p).sum();
                    if (total - 1.0).abs() > AGENT_ROW_SUM {
                        return Err(Error::InvalidModel(format!(
                            "agent {name}: row (o={}, l={}, a={a}) sums to {total}",
                            states[s].obs, states[s].local
                        )));
                    }
                    if d.iter().any(|(_, p)| *p > 1.0) {
                        return Err(Error::InvalidModel(format!(
                            "agent {name}: probability above one in row (o={}, l={}, a={a})",
                            states[s].obs, states[s].local
                        )));
                    }
                    any = true;
                }
            }
            if !any {
                return Err(Error::InvalidModel(format!(
                    "agent {name}: state (o={}, l={}) has no enabled action",
                    states[s].obs, states[s].local
                )));
            }
        }
        let init = lookup(&init)?;
        Ok(Self {
            name,
            num_obs,
            states,
            action_names,
            transitions,
            init,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_obs(&self) -> usize {
        self.num_obs
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn states(&self) -> &[LocalState] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> LocalState {
        self.states[idx]
    }

    pub fn state_index(&self, s: LocalState) -> Option<usize> {
        self.states.binary_search(&s).ok()
    }

    /// Index of the (unique) state carrying private label `local`, if any.
    pub fn state_by_local(&self, local: usize) -> Option<usize> {
        let mut it = self.states.iter().enumerate().filter(|(_, s)| s.local == local);
        let first = it.next()?.0;
        if it.next().is_some() {
            None
        } else {
            Some(first)
        }
    }

    pub fn init(&self) -> usize {
        self.init
    }

    pub fn transition(&self, state: usize, action: usize) -> Option<&Distribution> {
        self.transitions[state][action].as_ref()
    }

    /// Enabled actions at `state`, ascending.
    pub fn enabled_actions(&self, state: usize) -> Vec<usize> {
        self.transitions[state]
            .iter()
            .enumerate()
            .filter_map(|(a, d)| d.as_ref().map(|_| a))
            .collect()
    }

    /// Shannon entropy (nats) of the successor distribution of `(state, action)`.
    pub fn transition_entropy(&self, state: usize, action: usize) -> f64 {
        self.transition(state, action)
            .map(|d| d.iter().map(|&(_, p)| entropy_term(p)).sum())
            .unwrap_or(0.0)
    }
}

/// `-p ln p` with the `0 ln 0 = 0` convention.
pub fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls(obs: usize, local: usize) -> LocalState {
        LocalState { obs, local }
    }

    fn row(s: usize, a: usize, n: usize, p: f64) -> TransitionRow {
        TransitionRow {
            state: ls(0, s),
            action: a,
            next: ls(0, n),
            prob: p,
        }
    }

    #[test]
    fn rejects_rows_not_summing_to_one() {
        let err = AgentModel::new(
            "a",
            1,
            vec![ls(0, 0), ls(0, 1)],
            vec!["go".into()],
            &[row(0, 0, 1, 0.5), row(1, 0, 1, 1.0)],
            ls(0, 0),
        )
        .unwrap_err();
        assert!(err.to_string().contains("sums to"));
    }

    #[test]
    fn rejects_state_without_actions() {
        let err = AgentModel::new(
            "a",
            1,
            vec![ls(0, 0), ls(0, 1)],
            vec!["go".into()],
            &[row(0, 0, 1, 1.0)],
            ls(0, 0),
        )
        .unwrap_err();
        assert!(err.to_string().contains("no enabled action"));
    }

    #[test]
    fn states_are_sorted_and_entropy_matches() {
        let m = AgentModel::new(
            "a",
            2,
            vec![ls(1, 0), ls(0, 1)],
            vec!["go".into()],
            &[
                TransitionRow { state: ls(0, 1), action: 0, next: ls(1, 0), prob: 0.5 },
                TransitionRow { state: ls(0, 1), action: 0, next: ls(0, 1), prob: 0.5 },
                TransitionRow { state: ls(1, 0), action: 0, next: ls(1, 0), prob: 1.0 },
            ],
            ls(0, 1),
        )
        .unwrap();
        assert_eq!(m.states(), &[ls(0, 1), ls(1, 0)]);
        assert_eq!(m.init(), 0);
        assert!((m.transition_entropy(0, 0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(m.transition_entropy(1, 0), 0.0);
    }
}
